# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels, a twin of ``pidp._kernels_py`` with identical formulas.

See that module for the function contracts. Operation order mirrors the
pure-Python reference so the two backends agree to roundoff.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin, sqrt

cnp.import_array()

#: Central-difference step floor for Jacobians of derived (bracketed) fields.
FD_STEP_FLOOR = 1e-6

cdef double _FD_FLOOR = 1e-6


cdef inline double _fd_step_c(const double* z) nogil:
    cdef double n = sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3])
    cdef double h = _FD_FLOOR * n
    if h < _FD_FLOOR:
        h = _FD_FLOOR
    return h


cdef inline void _drift_c(double m1, double m2, double r1, double r2, double g,
                          const double* z, double* out) nogil:
    cdef double th1 = z[0]
    cdef double th2 = z[1]
    cdef double w1 = z[2]
    cdef double w2 = z[3]
    cdef double s = sin(th1 - th2)
    cdef double c = cos(th1 - th2)
    cdef double dlt = (r1 * r2) * (m1 + m2 * s * s)
    cdef double s1 = sin(th1)
    cdef double s2 = sin(th2)
    out[0] = w1
    out[1] = w2
    out[2] = (-g * r2 * (m2 * s2 * c - (m1 + m2) * s1) - s * m2 * r2 * (r1 * c * w1 * w1 + r2 * w2 * w2)) / dlt
    out[3] = (-g * r1 * (m1 + m2) * (c * s1 - s2) + s * r1 * (r1 * (m1 + m2) * w1 * w1 + r2 * m2 * c * w2 * w2)) / dlt


cdef inline void _control_c(double m1, double m2, double r1, double r2, double g,
                            const double* z, double* out) nogil:
    cdef double th1 = z[0]
    cdef double th2 = z[1]
    cdef double s = sin(th1 - th2)
    cdef double c = cos(th1 - th2)
    cdef double dlt = (r1 * r2) * (m1 + m2 * s * s)
    cdef double b1 = m2 * r2 * (r1 * m2 * c - r2 * m1)
    cdef double b2 = m2 * r1 * (r2 * m1 * c - r1 * (m1 + m2))
    out[0] = 0.0
    out[1] = 0.0
    out[2] = b1 / dlt
    out[3] = b2 / dlt


cdef inline void _rhs_c(double m1, double m2, double r1, double r2, double g,
                        const double* z, double u, double* out) nogil:
    cdef double th1 = z[0]
    cdef double th2 = z[1]
    cdef double w1 = z[2]
    cdef double w2 = z[3]
    cdef double s = sin(th1 - th2)
    cdef double c = cos(th1 - th2)
    cdef double dlt = (r1 * r2) * (m1 + m2 * s * s)
    cdef double s1 = sin(th1)
    cdef double s2 = sin(th2)
    cdef double f3 = (-g * r2 * (m2 * s2 * c - (m1 + m2) * s1) - s * m2 * r2 * (r1 * c * w1 * w1 + r2 * w2 * w2)) / dlt
    cdef double f4 = (-g * r1 * (m1 + m2) * (c * s1 - s2) + s * r1 * (r1 * (m1 + m2) * w1 * w1 + r2 * m2 * c * w2 * w2)) / dlt
    cdef double b1 = m2 * r2 * (r1 * m2 * c - r2 * m1)
    cdef double b2 = m2 * r1 * (r2 * m1 * c - r1 * (m1 + m2))
    out[0] = w1
    out[1] = w2
    out[2] = f3 + u * (b1 / dlt)
    out[3] = f4 + u * (b2 / dlt)


cdef inline void _x1_jacobian_c(double m1, double m2, double r1, double r2, double g,
                                const double* z, double* j) nogil:
    cdef double th1 = z[0]
    cdef double th2 = z[1]
    cdef double w1 = z[2]
    cdef double w2 = z[3]
    cdef double s = sin(th1 - th2)
    cdef double c = cos(th1 - th2)
    cdef double c2d = c * c - s * s
    cdef double dlt = (r1 * r2) * (m1 + m2 * s * s)
    cdef double s1 = sin(th1)
    cdef double c1 = cos(th1)
    cdef double s2 = sin(th2)
    cdef double cth2 = cos(th2)
    cdef double big = m1 + m2
    cdef double ddlt = (r1 * r2 * m2) * (2.0 * s * c)
    cdef double cent1, cent2
    cdef int i
    for i in range(16):
        j[i] = 0.0
    j[0 * 4 + 0] = w1 * ddlt
    j[0 * 4 + 1] = -w1 * ddlt
    j[0 * 4 + 2] = dlt
    j[1 * 4 + 0] = w2 * ddlt
    j[1 * 4 + 1] = -w2 * ddlt
    j[1 * 4 + 3] = dlt
    cent1 = m2 * r2 * (r1 * c2d * w1 * w1 + r2 * c * w2 * w2)
    j[2 * 4 + 0] = g * r2 * m2 * s2 * s + g * r2 * big * c1 - cent1
    j[2 * 4 + 1] = -g * r2 * m2 * (cth2 * c + s2 * s) + cent1
    j[2 * 4 + 2] = -2.0 * m2 * r1 * r2 * s * c * w1
    j[2 * 4 + 3] = -2.0 * m2 * r2 * r2 * s * w2
    cent2 = r1 * (r1 * big * c * w1 * w1 + r2 * m2 * c2d * w2 * w2)
    j[3 * 4 + 0] = -g * r1 * big * (c * c1 - s * s1) + cent2
    j[3 * 4 + 1] = -g * r1 * big * (s * s1 - cth2) - cent2
    j[3 * 4 + 2] = 2.0 * r1 * r1 * big * s * w1
    j[3 * 4 + 3] = 2.0 * r1 * r2 * m2 * s * c * w2


cdef inline void _x2_jacobian_c(double m1, double m2, double r1, double r2, double g,
                                const double* z, double* j) nogil:
    cdef double s = sin(z[0] - z[1])
    cdef double db1 = -(m2 * m2) * r1 * r2 * s
    cdef double db2 = -(m1 * m2) * r1 * r2 * s
    cdef int i
    for i in range(16):
        j[i] = 0.0
    j[2 * 4 + 0] = db1
    j[2 * 4 + 1] = -db1
    j[3 * 4 + 0] = db2
    j[3 * 4 + 1] = -db2


cdef inline void _x1_value_c(double m1, double m2, double r1, double r2, double g,
                             const double* z, double* out) nogil:
    cdef double s = sin(z[0] - z[1])
    cdef double dlt = (r1 * r2) * (m1 + m2 * s * s)
    cdef double f[4]
    _drift_c(m1, m2, r1, r2, g, z, f)
    out[0] = dlt * f[0]
    out[1] = dlt * f[1]
    out[2] = dlt * f[2]
    out[3] = dlt * f[3]


cdef inline void _x2_value_c(double m1, double m2, double r1, double r2, double g,
                             const double* z, double* out) nogil:
    cdef double s = sin(z[0] - z[1])
    cdef double dlt = (r1 * r2) * (m1 + m2 * s * s)
    cdef double h[4]
    _control_c(m1, m2, r1, r2, g, z, h)
    out[0] = dlt * h[0]
    out[1] = dlt * h[1]
    out[2] = dlt * h[2]
    out[3] = dlt * h[3]


cdef inline void _matvec_sub(const double* ja, const double* va,
                             const double* jb, const double* vb, double* out) nogil:
    # out = ja@va - jb@vb for 4x4 row-major matrices
    cdef int i, k
    cdef double acc1, acc2
    for i in range(4):
        acc1 = 0.0
        acc2 = 0.0
        for k in range(4):
            acc1 += ja[i * 4 + k] * va[k]
            acc2 += jb[i * 4 + k] * vb[k]
        out[i] = acc1 - acc2


cdef inline void _x3_value_c(double m1, double m2, double r1, double r2, double g,
                             const double* z, double* out) nogil:
    cdef double x1[4]
    cdef double x2[4]
    cdef double j1[16]
    cdef double j2[16]
    _x1_value_c(m1, m2, r1, r2, g, z, x1)
    _x2_value_c(m1, m2, r1, r2, g, z, x2)
    _x1_jacobian_c(m1, m2, r1, r2, g, z, j1)
    _x2_jacobian_c(m1, m2, r1, r2, g, z, j2)
    _matvec_sub(j2, x1, j1, x2, out)


cdef inline void _x3_jacobian_c(double m1, double m2, double r1, double r2, double g,
                                const double* z, double* j) nogil:
    cdef double h = _fd_step_c(z)
    cdef double zp[4]
    cdef double zm[4]
    cdef double vp[4]
    cdef double vm[4]
    cdef int col, i
    for col in range(4):
        for i in range(4):
            zp[i] = z[i]
            zm[i] = z[i]
        zp[col] = zp[col] + h
        zm[col] = zm[col] - h
        _x3_value_c(m1, m2, r1, r2, g, zp, vp)
        _x3_value_c(m1, m2, r1, r2, g, zm, vm)
        for i in range(4):
            j[i * 4 + col] = (vp[i] - vm[i]) / (2.0 * h)


cdef inline void _x4_value_c(double m1, double m2, double r1, double r2, double g,
                             const double* z, double* out) nogil:
    cdef double x2[4]
    cdef double x3[4]
    cdef double j2[16]
    cdef double j3[16]
    _x2_value_c(m1, m2, r1, r2, g, z, x2)
    _x3_value_c(m1, m2, r1, r2, g, z, x3)
    _x2_jacobian_c(m1, m2, r1, r2, g, z, j2)
    _x3_jacobian_c(m1, m2, r1, r2, g, z, j3)
    _matvec_sub(j3, x2, j2, x3, out)


cdef inline void _x4_jacobian_c(double m1, double m2, double r1, double r2, double g,
                                const double* z, double* j) nogil:
    cdef double h = _fd_step_c(z)
    cdef double zp[4]
    cdef double zm[4]
    cdef double vp[4]
    cdef double vm[4]
    cdef int col, i
    for col in range(4):
        for i in range(4):
            zp[i] = z[i]
            zm[i] = z[i]
        zp[col] = zp[col] + h
        zm[col] = zm[col] - h
        _x4_value_c(m1, m2, r1, r2, g, zp, vp)
        _x4_value_c(m1, m2, r1, r2, g, zm, vm)
        for i in range(4):
            j[i * 4 + col] = (vp[i] - vm[i]) / (2.0 * h)


cdef inline void _field_value_c(double m1, double m2, double r1, double r2, double g,
                                int k, const double* z, double* out) nogil:
    if k == 1:
        _x1_value_c(m1, m2, r1, r2, g, z, out)
    elif k == 2:
        _x2_value_c(m1, m2, r1, r2, g, z, out)
    elif k == 3:
        _x3_value_c(m1, m2, r1, r2, g, z, out)
    else:
        _x4_value_c(m1, m2, r1, r2, g, z, out)


cdef inline void _read_state(object z, double* zs):
    cdef double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    zs[0] = zv[0]
    zs[1] = zv[1]
    zs[2] = zv[2]
    zs[3] = zv[3]


def fd_step(z):
    """Step size for derived-field Jacobians: max(1e-6, 1e-6*||z||)."""
    cdef double zs[4]
    _read_state(z, zs)
    return _fd_step_c(zs)


def delta(double m1, double m2, double r1, double r2, double g, double th1, double th2):
    cdef double s = sin(th1 - th2)
    return (r1 * r2) * (m1 + m2 * s * s)


def drift(double m1, double m2, double r1, double r2, double g, z):
    cdef double zs[4]
    cdef double out[4]
    _read_state(z, zs)
    _drift_c(m1, m2, r1, r2, g, zs, out)
    return np.array([out[0], out[1], out[2], out[3]])


def control(double m1, double m2, double r1, double r2, double g, z):
    cdef double zs[4]
    cdef double out[4]
    _read_state(z, zs)
    _control_c(m1, m2, r1, r2, g, zs, out)
    return np.array([out[0], out[1], out[2], out[3]])


def rhs(double m1, double m2, double r1, double r2, double g, z, double u):
    cdef double zs[4]
    cdef double out[4]
    _read_state(z, zs)
    _rhs_c(m1, m2, r1, r2, g, zs, u, out)
    return np.array([out[0], out[1], out[2], out[3]])


cdef object _mat_to_np(const double* j):
    out = np.empty((4, 4))
    cdef double[:, ::1] ov = out
    cdef int i, k
    for i in range(4):
        for k in range(4):
            ov[i, k] = j[i * 4 + k]
    return out


def x1_jacobian(double m1, double m2, double r1, double r2, double g, z):
    cdef double zs[4]
    cdef double j[16]
    _read_state(z, zs)
    _x1_jacobian_c(m1, m2, r1, r2, g, zs, j)
    return _mat_to_np(j)


def x2_jacobian(double m1, double m2, double r1, double r2, double g, z):
    cdef double zs[4]
    cdef double j[16]
    _read_state(z, zs)
    _x2_jacobian_c(m1, m2, r1, r2, g, zs, j)
    return _mat_to_np(j)


def x3_jacobian(double m1, double m2, double r1, double r2, double g, z):
    cdef double zs[4]
    cdef double j[16]
    _read_state(z, zs)
    _x3_jacobian_c(m1, m2, r1, r2, g, zs, j)
    return _mat_to_np(j)


def x4_jacobian(double m1, double m2, double r1, double r2, double g, z):
    cdef double zs[4]
    cdef double j[16]
    _read_state(z, zs)
    _x4_jacobian_c(m1, m2, r1, r2, g, zs, j)
    return _mat_to_np(j)


def field_value(double m1, double m2, double r1, double r2, double g, int k, z):
    if k < 1 or k > 4:
        raise ValueError(f"family index must be 1..4, got {k}")
    cdef double zs[4]
    cdef double out[4]
    _read_state(z, zs)
    _field_value_c(m1, m2, r1, r2, g, k, zs, out)
    return np.array([out[0], out[1], out[2], out[3]])


def leaf_matrix(double m1, double m2, double r1, double r2, double g, z):
    cdef double zs[4]
    cdef double row[4]
    cdef int k, i
    _read_state(z, zs)
    out = np.empty((4, 4))
    cdef double[:, ::1] ov = out
    for k in range(1, 5):
        _field_value_c(m1, m2, r1, r2, g, k, zs, row)
        for i in range(4):
            ov[k - 1, i] = row[i]
    return out


def stratum_dets(double m1, double m2, double r1, double r2, double g, z):
    cdef double zs[4]
    cdef double x1[4]
    cdef double x2[4]
    cdef double x3[4]
    cdef double x4[4]
    _read_state(z, zs)
    _x1_value_c(m1, m2, r1, r2, g, zs, x1)
    _x2_value_c(m1, m2, r1, r2, g, zs, x2)
    _x3_value_c(m1, m2, r1, r2, g, zs, x3)
    _x4_value_c(m1, m2, r1, r2, g, zs, x4)
    cdef double b1 = x2[2]
    cdef double b2 = x2[3]
    cdef double w1 = x4[2]
    cdef double w2 = x4[3]
    cdef double gdet = b1 * w2 - b2 * w1
    cdef double gs1 = b1 * b1 + b2 * b2
    cdef double gs2 = w1 * w1 + w2 * w2
    cdef double gscale = gs1 if gs1 > gs2 else gs2
    cdef double o1 = x1[0]
    cdef double o2 = x1[1]
    cdef double ob1 = x3[0]
    cdef double ob2 = x3[1]
    cdef double udet = o1 * ob2 - o2 * ob1
    cdef double us1 = o1 * o1 + o2 * o2
    cdef double us2 = ob1 * ob1 + ob2 * ob2
    cdef double uscale = us1 if us1 > us2 else us2
    return gdet, gscale, udet, uscale


def rk4_control_steps(double m1, double m2, double r1, double r2, double g,
                      z0, double u, double dt, int n, double bound):
    """See the pure-Python twin for the contract."""
    cdef double z[4]
    cdef double zt[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    cdef int i, j, stop
    _read_state(z0, z)
    states = np.empty((n, 4))
    cdef double[:, ::1] sv = states
    stop = -1
    for i in range(n):
        _rhs_c(m1, m2, r1, r2, g, z, u, k1)
        for j in range(4):
            zt[j] = z[j] + half * k1[j]
        _rhs_c(m1, m2, r1, r2, g, zt, u, k2)
        for j in range(4):
            zt[j] = z[j] + half * k2[j]
        _rhs_c(m1, m2, r1, r2, g, zt, u, k3)
        for j in range(4):
            zt[j] = z[j] + dt * k3[j]
        _rhs_c(m1, m2, r1, r2, g, zt, u, k4)
        for j in range(4):
            z[j] = z[j] + sixth * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            sv[i, j] = z[j]
        if not (fabs(z[0]) <= bound and fabs(z[1]) <= bound and fabs(z[2]) <= bound and fabs(z[3]) <= bound):
            stop = i
            break
    if stop >= 0:
        return states[: stop + 1], stop
    return states, -1


def rk4_field_steps(double m1, double m2, double r1, double r2, double g,
                    int k, z0, double h, int n, double bound):
    """See the pure-Python twin for the contract."""
    if k < 1 or k > 4:
        raise ValueError(f"family index must be 1..4, got {k}")
    cdef double z[4]
    cdef double znew[4]
    cdef double zt[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double half = 0.5 * h
    cdef double sixth = h / 6.0
    cdef int i, j
    cdef bint ok = True
    _read_state(z0, z)
    for i in range(n):
        _field_value_c(m1, m2, r1, r2, g, k, z, k1)
        for j in range(4):
            zt[j] = z[j] + half * k1[j]
        _field_value_c(m1, m2, r1, r2, g, k, zt, k2)
        for j in range(4):
            zt[j] = z[j] + half * k2[j]
        _field_value_c(m1, m2, r1, r2, g, k, zt, k3)
        for j in range(4):
            zt[j] = z[j] + h * k3[j]
        _field_value_c(m1, m2, r1, r2, g, k, zt, k4)
        for j in range(4):
            znew[j] = z[j] + sixth * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        if not (fabs(znew[0]) <= bound and fabs(znew[1]) <= bound and fabs(znew[2]) <= bound and fabs(znew[3]) <= bound):
            ok = False
            break
        for j in range(4):
            z[j] = znew[j]
    return np.array([z[0], z[1], z[2], z[3]]), ok
