"""Static figure emission for tracking results (no interactive UI)."""

from __future__ import annotations

from pathlib import Path

from .kitti_io import TrackRow, rows_by_frame


def _color(track_id: int):
    import matplotlib.cm as cm
    return cm.tab20(track_id % 20)


def render_plots(hyp_rows: list[TrackRow], gt_rows: list[TrackRow] | None,
                 out_dir, every: int = 50) -> list[Path]:
    """Write trajectory plots and periodic frame overlays as PNG files.

    Emits ``trajectories_image.png`` (2D box centers over the image plane),
    ``trajectories_bev.png`` (bird's-eye x/z of 3D centers), and one overlay
    per ``every`` frames (0 disables overlays). Returns the written paths.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import Rectangle

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def track_points(rows):
        by_id: dict[int, list] = {}
        for r in rows:
            by_id.setdefault(r.track_id, []).append(r)
        return by_id

    hyp_by_id = track_points(hyp_rows)

    fig, ax = plt.subplots(figsize=(10, 5))
    for tid, rows in sorted(hyp_by_id.items()):
        pts = [(r.box2d.center) for r in rows if r.box2d is not None]
        if not pts:
            continue
        xs, ys = zip(*pts)
        ax.plot(xs, ys, "-", color=_color(tid), linewidth=1.2, label=f"id {tid}")
    if gt_rows:
        for tid, rows in track_points(gt_rows).items():
            pts = [r.box2d.center for r in rows if r.box2d is not None]
            if pts:
                xs, ys = zip(*pts)
                ax.plot(xs, ys, "--", color="0.6", linewidth=0.8)
    ax.invert_yaxis()
    ax.set_xlabel("u (px)")
    ax.set_ylabel("v (px)")
    ax.set_title("2D box center trajectories (dashed: ground truth)")
    if len(hyp_by_id) <= 20:
        ax.legend(fontsize=6, ncol=2)
    path = out / "trajectories_image.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 7))
    for tid, rows in sorted(hyp_by_id.items()):
        pts = [(r.box3d.center_x, r.box3d.center_z) for r in rows if r.box3d is not None]
        if not pts:
            continue
        xs, zs = zip(*pts)
        ax.plot(xs, zs, "-", color=_color(tid), linewidth=1.2)
    if gt_rows:
        for tid, rows in track_points(gt_rows).items():
            pts = [(r.box3d.center_x, r.box3d.center_z) for r in rows if r.box3d is not None]
            if pts:
                xs, zs = zip(*pts)
                ax.plot(xs, zs, "--", color="0.6", linewidth=0.8)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("z (m)")
    ax.set_title("Bird's-eye 3D center trajectories")
    path = out / "trajectories_bev.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    if every > 0:
        hyp_frames = rows_by_frame(hyp_rows)
        gt_frames = rows_by_frame(gt_rows) if gt_rows else {}
        last = max(hyp_frames, default=-1)
        for frame in range(0, last + 1, every):
            fig, ax = plt.subplots(figsize=(10, 4))
            for r in gt_frames.get(frame, []):
                if r.box2d is None:
                    continue
                ax.add_patch(Rectangle((r.box2d.left, r.box2d.top), r.box2d.width,
                                       r.box2d.height, fill=False, linestyle="--",
                                       edgecolor="0.6"))
            for r in hyp_frames.get(frame, []):
                if r.box2d is None:
                    continue
                ax.add_patch(Rectangle((r.box2d.left, r.box2d.top), r.box2d.width,
                                       r.box2d.height, fill=False,
                                       edgecolor=_color(r.track_id)))
                ax.text(r.box2d.left, r.box2d.top - 2, str(r.track_id),
                        color=_color(r.track_id), fontsize=7)
            ax.autoscale_view()
            ax.invert_yaxis()
            ax.set_aspect("equal")
            ax.set_title(f"frame {frame}")
            path = out / f"frame_{frame:06d}.png"
            fig.savefig(path, dpi=120)
            plt.close(fig)
            written.append(path)
    return written
