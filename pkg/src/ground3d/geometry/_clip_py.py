"""Pure-Python oriented-box intersection kernel.

Mirrors ``_clip_cy.pyx`` function for function; the compiled module is
preferred at import time when present.  Keep the two implementations in
lockstep: they are compared by the benchmark and the parity tests.

A box is passed as a flat 15-float sequence::

    [cx, cy, cz, sx, sy, sz, r00, r01, r02, r10, r11, r12, r20, r21, r22]

with ``r`` the row-major local-to-world rotation.  The intersection volume is
computed by clipping each face of either box by the other box's six
half-spaces (3D Sutherland-Hodgman); the surviving faces form the closed
outward-oriented boundary of the intersection, whose volume follows from a
fan of signed tetrahedra around the vertex centroid.
"""

from __future__ import annotations

BACKEND = "pure-python"

# On-plane classification band (m) and the volume floor below which an
# intersection is reported as empty.
TOL = 1e-9
MIN_VOLUME = 1e-12

# Corner sign order: index i has signs SIGNS[i] applied to size/2.
SIGNS = (
    (-1.0, -1.0, -1.0),
    (1.0, -1.0, -1.0),
    (1.0, 1.0, -1.0),
    (-1.0, 1.0, -1.0),
    (-1.0, -1.0, 1.0),
    (1.0, -1.0, 1.0),
    (1.0, 1.0, 1.0),
    (-1.0, 1.0, 1.0),
)

# Outward-oriented quad faces over the corner indices above, paired with the
# local axis and sign of each face normal.
FACES = (
    (0, 3, 2, 1),
    (4, 5, 6, 7),
    (0, 4, 7, 3),
    (1, 2, 6, 5),
    (0, 1, 5, 4),
    (3, 7, 6, 2),
)
FACE_AXES = (2, 2, 0, 0, 1, 1)
FACE_SIGNS = (-1.0, 1.0, -1.0, 1.0, -1.0, 1.0)


def corners_from_params(p):
    """The 8 world-space corners in the fixed sign order."""
    cx, cy, cz = p[0], p[1], p[2]
    hx, hy, hz = 0.5 * p[3], 0.5 * p[4], 0.5 * p[5]
    out = []
    for sx, sy, sz in SIGNS:
        lx, ly, lz = sx * hx, sy * hy, sz * hz
        out.append(
            (
                cx + p[6] * lx + p[7] * ly + p[8] * lz,
                cy + p[9] * lx + p[10] * ly + p[11] * lz,
                cz + p[12] * lx + p[13] * ly + p[14] * lz,
            )
        )
    return out


def halfspaces_from_params(p):
    """Six (nx, ny, nz, d) tuples with inside = n.x <= d, normals outward."""
    cx, cy, cz = p[0], p[1], p[2]
    out = []
    for k in range(6):
        axis = FACE_AXES[k]
        sign = FACE_SIGNS[k]
        nx = sign * p[6 + axis]
        ny = sign * p[9 + axis]
        nz = sign * p[12 + axis]
        d = nx * cx + ny * cy + nz * cz + 0.5 * p[3 + axis]
        out.append((nx, ny, nz, d))
    return out


def _clip_polygon(poly, nx, ny, nz, d):
    """Sutherland-Hodgman clip of a convex polygon by one half-space."""
    out = []
    px, py, pz = poly[-1]
    pd = nx * px + ny * py + nz * pz - d
    pin = pd <= TOL
    for v in poly:
        vx, vy, vz = v
        vd = nx * vx + ny * vy + nz * vz - d
        vin = vd <= TOL
        if vin != pin:
            t = pd / (pd - vd)
            out.append((px + t * (vx - px), py + t * (vy - py), pz + t * (vz - pz)))
        if vin:
            out.append(v)
        px, py, pz, pd, pin = vx, vy, vz, vd, vin
    return out


def intersection_faces(a, b):
    """Outward-oriented boundary faces of the intersection of two boxes.

    Faces of ``a`` are clipped by the half-spaces of ``b`` and vice versa.  A
    face of ``b`` coplanar with a same-oriented face of ``a`` duplicates a
    boundary patch already contributed by ``a`` and is dropped.
    """
    faces = []
    for box, other, dedupe in ((a, b, False), (b, a, True)):
        corners = corners_from_params(box)
        halfspaces = halfspaces_from_params(other)
        for k in range(6):
            poly = [corners[i] for i in FACES[k]]
            if dedupe:
                axis = FACE_AXES[k]
                sign = FACE_SIGNS[k]
                fnx = sign * box[6 + axis]
                fny = sign * box[9 + axis]
                fnz = sign * box[12 + axis]
            for nx, ny, nz, d in halfspaces:
                if dedupe and fnx * nx + fny * ny + fnz * nz > 1.0 - 1e-9:
                    # Same plane, same orientation: vertex distance decides.
                    vx, vy, vz = poly[0]
                    if abs(nx * vx + ny * vy + nz * vz - d) <= TOL:
                        poly = []
                        break
                poly = _clip_polygon(poly, nx, ny, nz, d)
                if len(poly) < 3:
                    poly = []
                    break
            if poly:
                faces.append(poly)
    return faces


def _fan_volume(faces):
    cx = cy = cz = 0.0
    count = 0
    for poly in faces:
        for x, y, z in poly:
            cx += x
            cy += y
            cz += z
            count += 1
    if count == 0:
        return 0.0
    cx /= count
    cy /= count
    cz /= count
    vol = 0.0
    for poly in faces:
        x0, y0, z0 = poly[0]
        ax, ay, az = x0 - cx, y0 - cy, z0 - cz
        for t in range(1, len(poly) - 1):
            x1, y1, z1 = poly[t]
            x2, y2, z2 = poly[t + 1]
            bx, by, bz = x1 - cx, y1 - cy, z1 - cz
            dx, dy, dz = x2 - cx, y2 - cy, z2 - cz
            vol += ax * (by * dz - bz * dy) + ay * (bz * dx - bx * dz) + az * (bx * dy - by * dx)
    return vol / 6.0


def box_intersection_volume(a, b) -> float:
    """Exact intersection volume (m^3) of two oriented boxes."""
    # Bounding-sphere reject: cheap and exact-safe.
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    dz = a[2] - b[2]
    ra = 0.5 * (a[3] * a[3] + a[4] * a[4] + a[5] * a[5]) ** 0.5
    rb = 0.5 * (b[3] * b[3] + b[4] * b[4] + b[5] * b[5]) ** 0.5
    if dx * dx + dy * dy + dz * dz > (ra + rb) * (ra + rb):
        return 0.0
    vol = _fan_volume(intersection_faces(a, b))
    if vol < MIN_VOLUME:
        return 0.0
    return vol


def box_iou(a, b) -> float:
    """Intersection over union of two oriented boxes given as parameter rows."""
    inter = box_intersection_volume(a, b)
    if inter <= 0.0:
        return 0.0
    va = a[3] * a[4] * a[5]
    vb = b[3] * b[4] * b[5]
    union = va + vb - inter
    if union <= 0.0:
        return 0.0
    r = inter / union
    if r > 1.0:
        return 1.0
    return r


def _rows(params):
    # numpy rows are slow to index elementwise; drop to plain lists once.
    return params.tolist() if hasattr(params, "tolist") else params


def iou_pairs(a_params, b_params, out):
    """Elementwise IoU of row-aligned (n, 15) parameter arrays into ``out``."""
    a_rows = _rows(a_params)
    b_rows = _rows(b_params)
    for i in range(len(out)):
        out[i] = box_iou(a_rows[i], b_rows[i])
    return out


def iou_matrix(a_params, b_params, out):
    """All-pairs IoU of (n, 15) x (m, 15) parameter arrays into ``out``."""
    a_rows = _rows(a_params)
    b_rows = _rows(b_params)
    for i, row in enumerate(a_rows):
        for j, col in enumerate(b_rows):
            out[i, j] = box_iou(row, col)
    return out
