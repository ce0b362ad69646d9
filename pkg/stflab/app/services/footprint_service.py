import logging
import math
from typing import List, Optional, Sequence
import numpy as np
from ..models.footprint import OptimizationResult, OptParams, UsageHistogram
from ..models.wave import FootprintKind, FootprintTable, WaveConfig
from ..utils.logging import log_action


logger = logging.getLogger(__name__)

STALL_DRAWS_PER_ENTRY = 64
STAGE2_CHUNK = 1000
IMPROVEMENT_EPSILON = 1e-12


def _membership(candidates: np.ndarray, lanes: int) -> np.ndarray:
    """One-hot (lanes, candidates, lanes) table: [l, k, j] = 1 when candidate k of lane l reads j."""
    one_hot = np.zeros(candidates.shape[:2] + (lanes,), dtype=np.int64)
    np.put_along_axis(one_hot, candidates, 1, axis=2)
    return one_hot


def _stddev(counts: np.ndarray) -> np.ndarray:
    return np.std(counts, axis=-1)


class FootprintService:
    @staticmethod
    def relaxed_sigma(lane: int, cfg: WaveConfig, params: OptParams) -> float:
        x, y = cfg.lane_xy(lane)
        on_x = x in (0, cfg.cols - 1)
        on_y = y in (0, cfg.rows - 1)
        if on_x and on_y:
            return params.sigma * params.corner_relax
        if on_x or on_y:
            return params.sigma * params.edge_relax
        return params.sigma

    @staticmethod
    def gen_candidates(
        lane: int,
        cfg: WaveConfig,
        params: OptParams,
        rng: Optional[np.random.Generator] = None,
    ) -> List[List[int]]:
        """Random compact footprints around ``lane`` from rounded normal offsets.

        Out-of-wave draws are rejected and repeated lanes discarded. If the
        draws stop producing new lanes the footprint is completed from the clamped
        square window around the lane, so a vanishing sigma gives the square block.
        """
        size = params.footprint_size
        if size > cfg.lanes:
            raise ValueError(f"Footprint size {size} exceeds the {cfg.lanes}-lane wave")
        rng = rng if rng is not None else np.random.default_rng(params.seed)
        sigma = FootprintService.relaxed_sigma(lane, cfg, params)
        x0, y0 = cfg.lane_xy(lane)
        stall_limit = STALL_DRAWS_PER_ENTRY * size

        candidates = []
        for _ in range(params.candidates_per_lane):
            members = {lane}
            stalled = 0
            while len(members) < size and stalled < stall_limit:
                dx, dy = (int(v) for v in np.rint(rng.normal(0.0, sigma, size=2)))
                x, y = x0 + dx, y0 + dy
                if 0 <= x < cfg.cols and 0 <= y < cfg.rows and cfg.lane_at(x, y) not in members:
                    members.add(cfg.lane_at(x, y))
                    stalled = 0
                else:
                    stalled += 1
            if len(members) < size:
                fill = FootprintService._window_fill(lane, cfg, members, size - len(members))
                members |= set(fill)
            candidates.append([lane] + sorted(members - {lane}))
        return candidates

    @staticmethod
    def _window_fill(lane: int, cfg: WaveConfig, exclude: set, count: int) -> List[int]:
        """Lanes of the clamped square window around ``lane`` first, then Chebyshev order.

        The window side is the smallest square holding the footprint, shifted to
        stay inside the wave like the square footprints; ties break row-major.
        """
        x0, y0 = cfg.lane_xy(lane)
        side = math.ceil(math.sqrt(count + len(exclude)))
        before = (side - 1) // 2
        wx = min(max(x0 - before, 0), max(cfg.cols - side, 0))
        wy = min(max(y0 - before, 0), max(cfg.rows - side, 0))

        def rank(other: int):
            x, y = cfg.lane_xy(other)
            outside = not (wx <= x < wx + side and wy <= y < wy + side)
            return outside, max(abs(x - x0), abs(y - y0)), other

        remaining = sorted((other for other in range(cfg.lanes) if other not in exclude), key=rank)
        return remaining[:count]

    @staticmethod
    def score_configuration(selection: Sequence[Sequence[int]], lanes: Optional[int] = None) -> float:
        """Population stddev of how often each lane is read under one footprint per lane."""
        lanes = lanes or len(selection)
        counts = np.bincount(np.concatenate([np.asarray(row) for row in selection]), minlength=lanes)
        return float(np.std(counts))

    @staticmethod
    def usage_histogram(table: FootprintTable) -> UsageHistogram:
        return UsageHistogram.from_counts(np.bincount(table.as_array().ravel(), minlength=table.lanes))

    @staticmethod
    @log_action("Optimize sparse footprints")
    def optimize_sparse_footprints(cfg: WaveConfig, params: OptParams) -> OptimizationResult:
        """Random restarts of random-selection search followed by coordinate descent."""
        if params.footprint_size > cfg.lanes:
            raise ValueError(
                f"Footprint size {params.footprint_size} exceeds the {cfg.lanes}-lane wave"
            )

        best = None
        stage2_scores, restart_scores = [], []
        for restart, child in enumerate(np.random.SeedSequence(params.seed).spawn(params.restarts)):
            rng = np.random.default_rng(child)
            candidates = np.array(
                [FootprintService.gen_candidates(lane, cfg, params, rng) for lane in range(cfg.lanes)],
                dtype=np.int64,
            )
            membership = _membership(candidates, cfg.lanes)

            selection, stage2 = FootprintService._random_search(membership, params.stage2_trials, rng)
            selection, score, trace = FootprintService._coordinate_descent(membership, selection)

            stage2_scores.append(stage2)
            restart_scores.append(score)
            logger.debug(f"Restart {restart}: stage 2 {stage2:.4f}, descent {score:.4f}")
            if best is None or score < best[1]:
                rows = candidates[np.arange(cfg.lanes), selection]
                best = (restart, score, rows, trace)

        restart, score, rows, trace = best
        table = FootprintTable(
            lanes=cfg.lanes,
            shape=cfg.shape,
            footprint_size=params.footprint_size,
            kind=FootprintKind.SPARSE,
            table=rows.tolist(),
        )
        logger.info(
            f"Sparse footprint size {params.footprint_size}: score {score:.4f} (restart {restart})"
        )
        return OptimizationResult(
            table=table,
            score=score,
            best_restart=restart,
            stage2_scores=stage2_scores,
            restart_scores=restart_scores,
            descent_trace=trace,
        )

    @staticmethod
    def _random_search(membership: np.ndarray, trials: int, rng: np.random.Generator):
        lanes, per_lane, _ = membership.shape
        choices = rng.integers(per_lane, size=(trials, lanes))
        best_score, best_choice = np.inf, None
        for start in range(0, trials, STAGE2_CHUNK):
            chunk = choices[start : start + STAGE2_CHUNK]
            counts = membership[np.arange(lanes), chunk].sum(axis=1)
            scores = _stddev(counts)
            index = int(np.argmin(scores))
            if scores[index] < best_score:
                best_score, best_choice = float(scores[index]), chunk[index].copy()
        return best_choice, best_score

    @staticmethod
    def _coordinate_descent(membership: np.ndarray, selection: np.ndarray):
        """Swap one lane's candidate at a time while the score strictly improves."""
        lanes = membership.shape[0]
        counts = membership[np.arange(lanes), selection].sum(axis=0)
        score = float(_stddev(counts))
        trace = [score]

        improved = True
        while improved:
            improved = False
            for lane in range(lanes):
                alternatives = counts - membership[lane, selection[lane]] + membership[lane]
                scores = _stddev(alternatives)
                choice = int(np.argmin(scores))
                if scores[choice] < score - IMPROVEMENT_EPSILON:
                    selection[lane] = choice
                    counts = alternatives[choice]
                    score = float(scores[choice])
                    trace.append(score)
                    improved = True
        return selection, score, trace

    @staticmethod
    def optimize_frames(cfg: WaveConfig, params: OptParams, frames: int) -> List[OptimizationResult]:
        """One optimized table per frame, each from its own seed derived from ``params.seed``."""
        if frames < 1:
            raise ValueError("At least one frame is required")
        results = []
        for frame in range(frames):
            seed = int(np.random.SeedSequence([params.seed, frame]).generate_state(1)[0])
            frame_params = params.model_copy(update={"seed": seed})
            results.append(FootprintService.optimize_sparse_footprints(cfg, frame_params))
        return results
