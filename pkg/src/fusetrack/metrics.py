"""CLEAR-MOT evaluation over KITTI-format ground truth and hypotheses.

Matching is 2D: only rows carrying a valid image box take part. Ground-truth
rows flagged more occluded than ``max_occlusion`` are treated as don't-care
and leave the evaluation domain entirely (they cannot cause misses, and
frames where a ground-truth track is don't-care do not count toward its
coverage). Frame-to-frame correspondences persist while they stay above the
IoU gate; the remainder is re-matched by optimal assignment each frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError
from .geometry import iou_matrix
from .kitti_io import TrackRow


@dataclass(slots=True)
class MotScore:
    mota: float
    idsw: int
    fp: int
    fn: int
    frag: int
    mt: int
    ml: int
    gt_total: int

    def summary(self) -> str:
        return (f"MOTA {self.mota:.4f} | FP {self.fp} | FN {self.fn} | "
                f"IDSW {self.idsw} | Frag {self.frag} | MT {self.mt} | "
                f"ML {self.ml} | GT {self.gt_total}")


def _eligible(rows: list[TrackRow], category: str | None, max_occlusion: int | None):
    """Group evaluable rows (valid 2D box, category, occlusion filter) by frame."""
    grouped: dict[int, list[TrackRow]] = {}
    for row in rows:
        if row.box2d is None:
            continue
        if category is not None and row.category != category:
            continue
        if max_occlusion is not None and row.occluded > max_occlusion:
            continue
        grouped.setdefault(row.frame, []).append(row)
    return grouped


def evaluate(gt_rows: list[TrackRow], hyp_rows: list[TrackRow], *,
             iou_gate: float = 0.5, category: str | None = None,
             max_occlusion: int | None = 0) -> MotScore:
    """Score tracking hypotheses against ground truth.

    Raises DataError when the hypothesis stream extends past the last
    ground-truth frame (a shorter hypothesis simply has empty frames).
    """
    gt_last = max((r.frame for r in gt_rows), default=-1)
    hyp_last = max((r.frame for r in hyp_rows), default=-1)
    if hyp_last > gt_last:
        raise DataError(
            f"hypothesis runs to frame {hyp_last} but ground truth ends at {gt_last}")

    gt_frames = _eligible(gt_rows, category, max_occlusion)
    hyp_frames = _eligible(hyp_rows, category, None)

    fp = fn = idsw = gt_total = 0
    last_hyp_of_gt: dict[int, int] = {}
    # Per ground-truth track, the matched/missed status of each frame where
    # it is evaluable, in frame order (for coverage and fragmentation).
    status_of_gt: dict[int, list[bool]] = {}

    for frame in range(gt_last + 1):
        gts = gt_frames.get(frame, [])
        hyps = hyp_frames.get(frame, [])
        gt_total += len(gts)
        pairs: dict[int, int] = {}  # gt index -> hyp index
        if gts and hyps:
            ious = iou_matrix([g.box2d for g in gts], [h.box2d for h in hyps])
            hyp_index_by_id = {h.track_id: j for j, h in enumerate(hyps)}
            taken: set[int] = set()
            # Correspondences from earlier frames survive while gated.
            for i, g in enumerate(gts):
                j = hyp_index_by_id.get(last_hyp_of_gt.get(g.track_id))
                if j is not None and j not in taken and ious[i, j] >= iou_gate:
                    pairs[i] = j
                    taken.add(j)
            # Optimal assignment for whatever is left.
            free_g = [i for i in range(len(gts)) if i not in pairs]
            free_h = [j for j in range(len(hyps)) if j not in taken]
            if free_g and free_h:
                sub = ious[np.ix_(free_g, free_h)]
                rows_idx, cols_idx = linear_sum_assignment(-sub)
                for r, c in zip(rows_idx, cols_idx):
                    if sub[r, c] >= iou_gate:
                        pairs[free_g[r]] = free_h[c]
            for i, j in pairs.items():
                gid = gts[i].track_id
                hid = hyps[j].track_id
                if gid in last_hyp_of_gt and last_hyp_of_gt[gid] != hid:
                    idsw += 1
                last_hyp_of_gt[gid] = hid
        fn += len(gts) - len(pairs)
        fp += len(hyps) - len(pairs)
        for i, g in enumerate(gts):
            status_of_gt.setdefault(g.track_id, []).append(i in pairs)

    mt = ml = frag = 0
    for statuses in status_of_gt.values():
        coverage = sum(statuses) / len(statuses)
        if coverage >= 0.8:
            mt += 1
        if coverage <= 0.2:
            ml += 1
        seen_match = False
        in_gap = False
        for matched in statuses:
            if matched:
                if seen_match and in_gap:
                    frag += 1
                seen_match = True
                in_gap = False
            elif seen_match:
                in_gap = True

    if gt_total > 0:
        mota = 1.0 - (fp + fn + idsw) / gt_total
    else:
        mota = 1.0 if fp == 0 else 0.0
    return MotScore(mota=mota, idsw=idsw, fp=fp, fn=fn, frag=frag,
                    mt=mt, ml=ml, gt_total=gt_total)
