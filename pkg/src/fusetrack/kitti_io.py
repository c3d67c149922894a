"""Reading and writing the KITTI tracking text format.

One object per line:

    frame id type truncated occluded alpha left top right bottom
    h w l x y z yaw score

``truncated``/``occluded`` are -1 when unknown and ``alpha`` is -10. A
missing 2D box is written as the quadruple -1 -1 -1 -1; a missing 3D box as
dimensions -1 -1 -1, location -1000 -1000 -1000, and yaw -10. The 3D
location follows the KITTI label convention (bottom-face center); parsing
converts it to the cuboid centroid and writing converts back. Ground-truth
files without the trailing score column are accepted (score defaults to 1).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError
from .geometry import Box2D, Box3D, wrap_angle

_NO_LOCATION = -1000.0
_NO_YAW = -10.0


@dataclass(slots=True)
class TrackRow:
    """One line of a KITTI tracking file."""

    frame: int
    track_id: int
    category: str
    box2d: Box2D | None
    box3d: Box3D | None
    score: float = 1.0
    truncated: int = -1
    occluded: int = -1
    alpha: float = -10.0


def format_rows(rows: list[TrackRow]) -> str:
    """Serialize rows sorted by frame then id, floats at 6 decimals."""
    lines = []
    for row in sorted(rows, key=lambda r: (r.frame, r.track_id)):
        if row.box2d is not None:
            b2 = row.box2d.corners()
        else:
            b2 = (-1.0, -1.0, -1.0, -1.0)
        if row.box3d is not None:
            box = row.box3d
            b3 = (box.height, box.width, box.length,
                  box.center_x, box.center_y + 0.5 * box.height, box.center_z, box.yaw)
        else:
            b3 = (-1.0, -1.0, -1.0, _NO_LOCATION, _NO_LOCATION, _NO_LOCATION, _NO_YAW)
        fields = [
            str(row.frame), str(row.track_id), row.category,
            str(row.truncated), str(row.occluded), f"{row.alpha:.6f}",
        ]
        fields += [f"{v:.6f}" for v in b2]
        fields += [f"{v:.6f}" for v in b3]
        fields.append(f"{row.score:.6f}")
        lines.append(" ".join(fields))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_rows(stream) -> list[TrackRow]:
    """Parse KITTI tracking text; accepts 17 fields (no score) or 18.

    Boxes are read leniently: a 2D quadruple without positive area or a 3D
    entry without positive dimensions (the sentinels above included) parse
    as "no box" rather than as an error.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) not in (17, 18):
            raise ParseError(f"expected 17 or 18 fields, got {len(tokens)}", lineno)
        try:
            frame = int(tokens[0])
            track_id = int(tokens[1])
            category = tokens[2]
            truncated = int(float(tokens[3]))
            occluded = int(float(tokens[4]))
            alpha = float(tokens[5])
            l, t, r, b = (float(v) for v in tokens[6:10])
            h, w, ln = (float(v) for v in tokens[10:13])
            x, y, z = (float(v) for v in tokens[13:16])
            yaw = float(tokens[16])
            score = float(tokens[17]) if len(tokens) == 18 else 1.0
        except ValueError as exc:
            raise ParseError(f"bad field ({exc})", lineno) from None
        if frame < 0:
            raise ParseError(f"negative frame index {frame}", lineno)

        box2d = None
        if r > l and b > t:
            box2d = Box2D(l, t, r, b)
        box3d = None
        if h > 0 and w > 0 and ln > 0:
            box3d = Box3D(center_x=x, center_y=y - 0.5 * h, center_z=z,
                          height=h, width=w, length=ln, yaw=wrap_angle(yaw))
        rows.append(TrackRow(frame=frame, track_id=track_id, category=category,
                             box2d=box2d, box3d=box3d, score=score,
                             truncated=truncated, occluded=occluded, alpha=alpha))
    return rows


def rows_by_frame(rows: list[TrackRow]) -> dict[int, list[TrackRow]]:
    grouped: dict[int, list[TrackRow]] = {}
    for row in rows:
        grouped.setdefault(row.frame, []).append(row)
    return grouped
