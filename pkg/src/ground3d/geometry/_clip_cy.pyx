# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled oriented-box intersection kernel.

Function-for-function twin of ``_clip_py``; see that module for the
algorithm description and the 15-float box parameter layout.
"""

from libc.math cimport fabs, sqrt

BACKEND = "compiled"

cdef double TOL = 1e-9
cdef double MIN_VOLUME = 1e-12

# Flattened corner sign order, face loops, and face normal axis/sign tables;
# identical to the pure-Python module.
cdef double SIGNS[24]
SIGNS[:] = [-1, -1, -1,  1, -1, -1,  1, 1, -1,  -1, 1, -1,
            -1, -1,  1,  1, -1,  1,  1, 1,  1,  -1, 1,  1]
cdef int FACES[24]
FACES[:] = [0, 3, 2, 1,  4, 5, 6, 7,  0, 4, 7, 3,  1, 2, 6, 5,  0, 1, 5, 4,  3, 7, 6, 2]
cdef int FACE_AXES[6]
FACE_AXES[:] = [2, 2, 0, 0, 1, 1]
cdef double FACE_SIGNS[6]
FACE_SIGNS[:] = [-1, 1, -1, 1, -1, 1]

# A quad clipped by 6 planes gains at most one vertex per plane.
DEF MAXV = 16


cdef void _corners(const double* p, double* out) noexcept nogil:
    cdef double hx = 0.5 * p[3]
    cdef double hy = 0.5 * p[4]
    cdef double hz = 0.5 * p[5]
    cdef int i
    cdef double lx, ly, lz
    for i in range(8):
        lx = SIGNS[3 * i] * hx
        ly = SIGNS[3 * i + 1] * hy
        lz = SIGNS[3 * i + 2] * hz
        out[3 * i] = p[0] + p[6] * lx + p[7] * ly + p[8] * lz
        out[3 * i + 1] = p[1] + p[9] * lx + p[10] * ly + p[11] * lz
        out[3 * i + 2] = p[2] + p[12] * lx + p[13] * ly + p[14] * lz


cdef void _halfspaces(const double* p, double* out) noexcept nogil:
    # out holds 6 rows of (nx, ny, nz, d); inside is n.x <= d.
    cdef int k, axis
    cdef double sign, nx, ny, nz
    for k in range(6):
        axis = FACE_AXES[k]
        sign = FACE_SIGNS[k]
        nx = sign * p[6 + axis]
        ny = sign * p[9 + axis]
        nz = sign * p[12 + axis]
        out[4 * k] = nx
        out[4 * k + 1] = ny
        out[4 * k + 2] = nz
        out[4 * k + 3] = nx * p[0] + ny * p[1] + nz * p[2] + 0.5 * p[3 + axis]


cdef int _clip_polygon(double* poly, int n, double nx, double ny, double nz,
                       double d, double* out) noexcept nogil:
    cdef int count = 0
    cdef int i
    cdef double px, py, pz, pd, vx, vy, vz, vd, t
    cdef bint pin, vin
    px = poly[3 * (n - 1)]
    py = poly[3 * (n - 1) + 1]
    pz = poly[3 * (n - 1) + 2]
    pd = nx * px + ny * py + nz * pz - d
    pin = pd <= TOL
    for i in range(n):
        vx = poly[3 * i]
        vy = poly[3 * i + 1]
        vz = poly[3 * i + 2]
        vd = nx * vx + ny * vy + nz * vz - d
        vin = vd <= TOL
        if vin != pin:
            t = pd / (pd - vd)
            out[3 * count] = px + t * (vx - px)
            out[3 * count + 1] = py + t * (vy - py)
            out[3 * count + 2] = pz + t * (vz - pz)
            count += 1
        if vin:
            out[3 * count] = vx
            out[3 * count + 1] = vy
            out[3 * count + 2] = vz
            count += 1
        px = vx
        py = vy
        pz = vz
        pd = vd
        pin = vin
    return count


cdef double _intersection_volume(const double* a, const double* b) noexcept nogil:
    cdef double dx = a[0] - b[0]
    cdef double dy = a[1] - b[1]
    cdef double dz = a[2] - b[2]
    cdef double ra = 0.5 * sqrt(a[3] * a[3] + a[4] * a[4] + a[5] * a[5])
    cdef double rb = 0.5 * sqrt(b[3] * b[3] + b[4] * b[4] + b[5] * b[5])
    if dx * dx + dy * dy + dz * dz > (ra + rb) * (ra + rb):
        return 0.0

    cdef double corners[24]
    cdef double halfspaces[24]
    cdef double buf_a[3 * MAXV]
    cdef double buf_b[3 * MAXV]
    # 12 candidate faces of up to MAXV vertices each.
    cdef double faces[12 * 3 * MAXV]
    cdef int face_len[12]
    cdef int n_faces = 0

    cdef const double* box
    cdef const double* other
    cdef bint dedupe
    cdef int side, k, h, i, n
    cdef double fnx, fny, fnz, nx, ny, nz, d
    cdef double* cur
    cdef double* nxt
    cdef double* tmp

    for side in range(2):
        if side == 0:
            box = a
            other = b
            dedupe = False
        else:
            box = b
            other = a
            dedupe = True
        _corners(box, corners)
        _halfspaces(other, halfspaces)
        for k in range(6):
            cur = buf_a
            nxt = buf_b
            for i in range(4):
                cur[3 * i] = corners[3 * FACES[4 * k + i]]
                cur[3 * i + 1] = corners[3 * FACES[4 * k + i] + 1]
                cur[3 * i + 2] = corners[3 * FACES[4 * k + i] + 2]
            n = 4
            if dedupe:
                fnx = FACE_SIGNS[k] * box[6 + FACE_AXES[k]]
                fny = FACE_SIGNS[k] * box[9 + FACE_AXES[k]]
                fnz = FACE_SIGNS[k] * box[12 + FACE_AXES[k]]
            for h in range(6):
                nx = halfspaces[4 * h]
                ny = halfspaces[4 * h + 1]
                nz = halfspaces[4 * h + 2]
                d = halfspaces[4 * h + 3]
                if dedupe and fnx * nx + fny * ny + fnz * nz > 1.0 - 1e-9:
                    # Same plane, same orientation: drop the duplicate patch.
                    if fabs(nx * cur[0] + ny * cur[1] + nz * cur[2] - d) <= TOL:
                        n = 0
                        break
                n = _clip_polygon(cur, n, nx, ny, nz, d, nxt)
                tmp = cur
                cur = nxt
                nxt = tmp
                if n < 3:
                    n = 0
                    break
            if n >= 3:
                for i in range(3 * n):
                    faces[n_faces * 3 * MAXV + i] = cur[i]
                face_len[n_faces] = n
                n_faces += 1

    if n_faces == 0:
        return 0.0

    # Centroid of all face vertices, then a fan of signed tetrahedra.
    cdef double cx = 0.0, cy = 0.0, cz = 0.0
    cdef int count = 0
    cdef int f, t
    cdef double* poly
    for f in range(n_faces):
        poly = &faces[f * 3 * MAXV]
        for i in range(face_len[f]):
            cx += poly[3 * i]
            cy += poly[3 * i + 1]
            cz += poly[3 * i + 2]
            count += 1
    cx /= count
    cy /= count
    cz /= count

    cdef double vol = 0.0
    cdef double ax, ay, az, bx, by, bz, ex, ey, ez
    for f in range(n_faces):
        poly = &faces[f * 3 * MAXV]
        ax = poly[0] - cx
        ay = poly[1] - cy
        az = poly[2] - cz
        for t in range(1, face_len[f] - 1):
            bx = poly[3 * t] - cx
            by = poly[3 * t + 1] - cy
            bz = poly[3 * t + 2] - cz
            ex = poly[3 * t + 3] - cx
            ey = poly[3 * t + 4] - cy
            ez = poly[3 * t + 5] - cz
            vol += ax * (by * ez - bz * ey) + ay * (bz * ex - bx * ez) + az * (bx * ey - by * ex)
    vol /= 6.0
    if vol < MIN_VOLUME:
        return 0.0
    return vol


cdef double _iou(const double* a, const double* b) noexcept nogil:
    cdef double inter = _intersection_volume(a, b)
    if inter <= 0.0:
        return 0.0
    cdef double union_ = a[3] * a[4] * a[5] + b[3] * b[4] * b[5] - inter
    if union_ <= 0.0:
        return 0.0
    cdef double r = inter / union_
    if r > 1.0:
        return 1.0
    return r


cdef void _load_params(object seq, double* out):
    cdef int i
    for i in range(15):
        out[i] = seq[i]


def box_intersection_volume(a, b):
    """Exact intersection volume (m^3) of two oriented boxes."""
    cdef double pa[15]
    cdef double pb[15]
    _load_params(a, pa)
    _load_params(b, pb)
    return _intersection_volume(pa, pb)


def box_iou(a, b):
    """Intersection over union of two oriented boxes given as parameter rows."""
    cdef double pa[15]
    cdef double pb[15]
    _load_params(a, pa)
    _load_params(b, pb)
    return _iou(pa, pb)


def iou_pairs(double[:, ::1] a_params, double[:, ::1] b_params, double[::1] out):
    """Elementwise IoU of row-aligned (n, 15) parameter arrays into ``out``."""
    cdef Py_ssize_t i
    with nogil:
        for i in range(out.shape[0]):
            out[i] = _iou(&a_params[i, 0], &b_params[i, 0])
    return out


def iou_matrix(double[:, ::1] a_params, double[:, ::1] b_params, double[:, ::1] out):
    """All-pairs IoU of (n, 15) x (m, 15) parameter arrays into ``out``."""
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(a_params.shape[0]):
            for j in range(b_params.shape[0]):
                out[i, j] = _iou(&a_params[i, 0], &b_params[j, 0])
    return out
