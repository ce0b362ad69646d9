import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence
import numpy as np
from ..database import get_session
from ..models.estimator import EstimatorKind, SamplingMode
from ..models.noise import NoiseSource
from ..models.scene import Scene, StudyRow, TaylorFunction, TaylorReport
from ..models.texture import FilterKind, Texture
from ..models.wave import FootprintSet
from ..repositories.run_repo import ExperimentRunRepository
from ..utils import filtering
from ..utils.io import write_csv
from ..utils.logging import log_action, log_artifact_written, log_experiment
from .render_service import RenderService


logger = logging.getLogger(__name__)


def _taylor_terms(function: TaylorFunction):
    if function is TaylorFunction.SQUARE:
        return np.square, lambda x: 2.0 * np.ones_like(x)
    return np.exp, np.exp


class ExperimentService:
    @staticmethod
    def evaluate_configuration(
        scene: Scene,
        estimator: EstimatorKind,
        filter: FilterKind,
        footprint: FootprintSet,
        footprint_label: str,
        noise: NoiseSource,
        trials: int,
        seed: int = 0,
        spp: int = 1,
        sampling: SamplingMode = SamplingMode.FILTER,
    ) -> StudyRow:
        """Mean MSE and PSNR over ``trials`` single frames with seeds seed, seed + 1, ..."""
        if trials < 1:
            raise ValueError("At least one trial is required")
        mses, psnrs = [], []
        for trial in range(trials):
            result = RenderService.render_frame(
                scene,
                estimator,
                filter,
                footprint,
                noise.with_seed(seed + trial),
                frame_index=trial,
                spp=spp,
                sampling=sampling,
            )
            mses.append(result.metrics.mse)
            psnrs.append(result.metrics.psnr_db)

        row = StudyRow(
            estimator=estimator.label,
            footprint=footprint_label,
            noise=noise.label,
            zoom=scene.zoom,
            spp=spp,
            trials=trials,
            mse=float(np.mean(mses)),
            psnr_db=float(np.mean(psnrs)),
        )
        log_experiment(
            "configuration",
            {"estimator": row.estimator, "footprint": row.footprint, "zoom": row.zoom, "spp": spp},
            {"psnr_db": round(row.psnr_db, 3)},
        )
        return row

    @staticmethod
    @log_action("Zoom sweep")
    def zoom_sweep(
        scene: Scene,
        estimators: Sequence[EstimatorKind],
        zooms: Sequence[float],
        filter: FilterKind,
        footprint: FootprintSet,
        footprint_label: str,
        noise: NoiseSource,
        trials: int,
        seed: int = 0,
    ) -> List[StudyRow]:
        if any(zoom < 1.0 for zoom in zooms):
            raise ValueError("Zoom factors must be at least 1")
        rows = []
        for estimator in estimators:
            for zoom in zooms:
                rows.append(
                    ExperimentService.evaluate_configuration(
                        scene.with_zoom(zoom),
                        estimator,
                        filter,
                        footprint,
                        footprint_label,
                        noise,
                        trials,
                        seed,
                    )
                )
        return rows

    @staticmethod
    @log_action("Samples-per-pixel sweep")
    def spp_sweep(
        scene: Scene,
        estimators: Sequence[EstimatorKind],
        spp_list: Sequence[int],
        filter: FilterKind,
        footprint: FootprintSet,
        footprint_label: str,
        noise: NoiseSource,
        trials: int,
        seed: int = 0,
    ) -> List[StudyRow]:
        rows = []
        for estimator in estimators:
            for spp in spp_list:
                rows.append(
                    ExperimentService.evaluate_configuration(
                        scene, estimator, filter, footprint, footprint_label, noise, trials, seed, spp
                    )
                )
        return rows

    @staticmethod
    @log_action("Footprint study")
    def footprint_study(
        scene: Scene,
        footprints: Dict[str, FootprintSet],
        filter: FilterKind,
        noise: NoiseSource,
        trials: int,
        seed: int = 0,
        exact_options: Sequence[bool] = (False, True),
        sampling: SamplingMode = SamplingMode.FILTER,
    ) -> List[StudyRow]:
        """WIS per sharing footprint, with and without exact filtering, plus the one-tap baseline."""
        if not footprints:
            raise ValueError("At least one footprint is required")
        if filter is not FilterKind.BILINEAR:
            exact_options = [option for option in exact_options if not option]

        first = next(iter(footprints.values()))
        rows = [
            ExperimentService.evaluate_configuration(
                scene, EstimatorKind(variant="onetap"), filter, first, "self", noise, trials, seed
            )
        ]
        for label, footprint in footprints.items():
            for exact in exact_options:
                kind = EstimatorKind(variant="wis", exact_filtering=exact)
                rows.append(
                    ExperimentService.evaluate_configuration(
                        scene, kind, filter, footprint, label, noise, trials, seed, sampling=sampling
                    )
                )
        return rows

    @staticmethod
    @log_action("Noise study")
    def noise_study(
        scene: Scene,
        footprints: Dict[str, FootprintSet],
        noises: Sequence[NoiseSource],
        estimator: EstimatorKind,
        filter: FilterKind,
        trials: int,
        seed: int = 0,
    ) -> List[StudyRow]:
        rows = []
        for label, footprint in footprints.items():
            for noise in noises:
                rows.append(
                    ExperimentService.evaluate_configuration(
                        scene, estimator, filter, footprint, label, noise, trials, seed
                    )
                )
        return rows

    @staticmethod
    def taylor_bias_study(
        tex: Texture,
        filter: FilterKind,
        lookup_point: Sequence[float],
        function: TaylorFunction,
        trials: int = 0,
        seed: int = 0,
        channel: int = 0,
    ) -> TaylorReport:
        """Bias of shading after one-tap filtering, by exact enumeration of the filter support."""
        if not 0 <= channel < tex.channels:
            raise ValueError(f"Channel {channel} not in a {tex.channels}-channel texture")
        f, second_derivative = _taylor_terms(function)
        coords, weights = filtering.support_arrays(filter, np.asarray(lookup_point, dtype=np.float64))
        values = filtering.fetch(tex, coords)[:, channel]

        mu = float(np.sum(weights * values))
        var = float(np.sum(weights * (values - mu) ** 2))
        empirical = float(np.sum(weights * f(values)) - f(mu))
        predicted = float(second_derivative(np.float64(mu)) / 2.0 * var)

        sampled = None
        if trials > 0:
            u = np.random.default_rng(seed).random(trials)
            picks = filtering.invert_cdf(np.broadcast_to(weights, (trials, weights.size)), u)
            sampled = float(np.mean(f(values[picks])) - f(mu))

        return TaylorReport(
            mu=mu, var=var, empirical_bias=empirical, predicted_bias=predicted, sampled_bias=sampled
        )

    @staticmethod
    def write_rows(rows: Sequence[StudyRow], path: Path) -> Path:
        write_csv(path, StudyRow.csv_header(), (row.csv_row() for row in rows))
        log_artifact_written("csv", path, f"rows={len(rows)}")
        return Path(path)

    @staticmethod
    def record_runs(
        command: str,
        rows: Sequence[StudyRow],
        filter: FilterKind,
        seed: int,
        frames: int = 1,
    ) -> int:
        """Append study rows to the run ledger; returns the number of rows written."""
        entries = [
            {
                "command": command,
                "estimator": row.estimator,
                "filter": filter.value,
                "footprint": row.footprint,
                "noise": row.noise,
                "zoom": row.zoom,
                "seed": seed,
                "frames": frames,
                "mse": row.mse,
                "psnr_db": row.psnr_db,
            }
            for row in rows
        ]
        with get_session() as session:
            repo = ExperimentRunRepository(session)
            created = repo.create_many(entries)
            return len(created)

    @staticmethod
    def best_run(command: Optional[str] = None):
        with get_session() as session:
            run = ExperimentRunRepository(session).best_psnr(command)
            if run is not None:
                session.expunge(run)
            return run

    @staticmethod
    def latest_runs(command: Optional[str] = None, limit: int = 20, **filters):
        """Most recent runs first, detached from the session.

        ``filters`` match ledger columns such as ``estimator`` or ``noise``; ``None`` values
        are dropped.
        """
        filters = {key: value for key, value in filters.items() if value is not None}
        if command:
            filters["command"] = command
        with get_session() as session:
            repo = ExperimentRunRepository(session)
            if filters:
                runs = list(reversed(repo.filter_by(**filters)))[:limit]
            else:
                runs = repo.get_latest(limit)
            for run in runs:
                session.expunge(run)
            return runs

    @staticmethod
    def count_runs() -> int:
        with get_session() as session:
            return ExperimentRunRepository(session).count()

    @staticmethod
    def get_run(run_id: int):
        with get_session() as session:
            run = ExperimentRunRepository(session).get_by_id(run_id)
            if run is not None:
                session.expunge(run)
            return run

    @staticmethod
    def zoom_trend(estimator: str, command: Optional[str] = None):
        """Runs of one estimator ordered by zoom, for reading PSNR against magnification."""
        with get_session() as session:
            runs = ExperimentRunRepository(session).get_by_estimator(estimator, command)
            for run in runs:
                session.expunge(run)
            return runs

    @staticmethod
    def delete_run(run_id: int) -> bool:
        with get_session() as session:
            deleted = ExperimentRunRepository(session).delete(run_id)
        if deleted:
            logger.info(f"Deleted run #{run_id} from the ledger")
        return deleted
