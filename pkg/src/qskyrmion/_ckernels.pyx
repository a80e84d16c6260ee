# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled statevector kernels.

All routines work in place on contiguous complex128 arrays of length 2**n,
with qubit 0 the least-significant bit of the basis index.
"""

from libc.math cimport cos, sin
from libc.stdint cimport int32_t, int64_t, uint64_t

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline double _sign(uint64_t v) noexcept nogil:
    return 1.0 - 2.0 * (__builtin_popcountll(v) & 1)


def apply_1q(double complex[::1] psi, int q, double complex u00, double complex u01,
             double complex u10, double complex u11):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t step = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i, j
    cdef double complex a, b
    with nogil:
        i = 0
        while i < dim:
            for j in range(i, i + step):
                a = psi[j]
                b = psi[j + step]
                psi[j] = u00 * a + u01 * b
                psi[j + step] = u10 * a + u11 * b
            i += 2 * step


def apply_rz(double complex[::1] psi, int q, double complex phase0, double complex phase1):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef uint64_t bit = (<uint64_t>1) << q
    cdef Py_ssize_t k
    with nogil:
        for k in range(dim):
            if (<uint64_t>k) & bit:
                psi[k] = psi[k] * phase1
            else:
                psi[k] = psi[k] * phase0


def apply_cnot(double complex[::1] psi, int control, int target):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef uint64_t cbit = (<uint64_t>1) << control
    cdef uint64_t tbit = (<uint64_t>1) << target
    cdef Py_ssize_t k
    cdef double complex tmp
    with nogil:
        for k in range(dim):
            if ((<uint64_t>k) & cbit) and not ((<uint64_t>k) & tbit):
                tmp = psi[k]
                psi[k] = psi[k | tbit]
                psi[k | tbit] = tmp


def apply_cz(double complex[::1] psi, int a, int b):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef uint64_t mask = ((<uint64_t>1) << a) | ((<uint64_t>1) << b)
    cdef Py_ssize_t k
    with nogil:
        for k in range(dim):
            if ((<uint64_t>k) & mask) == mask:
                psi[k] = -psi[k]


cdef void _matvec(const uint64_t* group_x, const int64_t* group_ptr, Py_ssize_t n_groups,
                  const uint64_t* zmask, const double* coef, const double* psi,
                  double* out, Py_ssize_t dim) noexcept nogil:
    # complex arrays seen as interleaved (re, im) doubles
    cdef Py_ssize_t g, t, a
    cdef uint64_t x, b
    cdef double sr, si, sg, pr, pi
    for a in range(2 * dim):
        out[a] = 0.0
    for g in range(n_groups):
        x = group_x[g]
        for a in range(dim):
            b = (<uint64_t>a) ^ x
            sr = 0.0
            si = 0.0
            for t in range(group_ptr[g], group_ptr[g + 1]):
                sg = _sign(b & zmask[t])
                sr += coef[2 * t] * sg
                si += coef[2 * t + 1] * sg
            pr = psi[2 * b]
            pi = psi[2 * b + 1]
            out[2 * a] += sr * pr - si * pi
            out[2 * a + 1] += sr * pi + si * pr


def pauli_matvec(const uint64_t[::1] group_x, const int64_t[::1] group_ptr,
                 const uint64_t[::1] zmask, const double complex[::1] coef,
                 const double complex[::1] psi, double complex[::1] out):
    """out = H psi for a grouped Pauli sum (terms sorted by x-mask)."""
    with nogil:
        _matvec(&group_x[0], &group_ptr[0], group_x.shape[0], &zmask[0],
                <const double*>&coef[0], <const double*>&psi[0], <double*>&out[0],
                psi.shape[0])


def pauli_expectation(const uint64_t[::1] group_x, const int64_t[::1] group_ptr,
                      const uint64_t[::1] zmask, const double complex[::1] coef,
                      const double complex[::1] psi):
    """<psi|H|psi> without a scratch vector."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t g, t, a
    cdef uint64_t x, b
    cdef const double* c = <const double*>&coef[0]
    cdef const double* p = <const double*>&psi[0]
    cdef double sr, si, sg, hr, hi, accr = 0.0, acci = 0.0
    with nogil:
        for g in range(group_x.shape[0]):
            x = group_x[g]
            for a in range(dim):
                b = (<uint64_t>a) ^ x
                sr = 0.0
                si = 0.0
                for t in range(group_ptr[g], group_ptr[g + 1]):
                    sg = _sign(b & zmask[t])
                    sr += c[2 * t] * sg
                    si += c[2 * t + 1] * sg
                hr = sr * p[2 * b] - si * p[2 * b + 1]
                hi = sr * p[2 * b + 1] + si * p[2 * b]
                accr += p[2 * a] * hr + p[2 * a + 1] * hi
                acci += p[2 * a] * hi - p[2 * a + 1] * hr
    return complex(accr, acci)


def pauli_overlap(const double complex[::1] bra, const double complex[::1] ket,
                  uint64_t x, uint64_t z):
    """sum_a conj(bra[a]) (-1)^popcount((a^x)&z) ket[a^x]; no i^ny factor."""
    cdef Py_ssize_t dim = ket.shape[0]
    cdef Py_ssize_t a
    cdef uint64_t b
    cdef double complex acc = 0
    with nogil:
        for a in range(dim):
            b = (<uint64_t>a) ^ x
            acc = acc + bra[a].conjugate() * _sign(b & z) * ket[b]
    return acc


# Circuit op codes shared with qskyrmion.ansatz
cdef enum:
    OP_RZ = 0
    OP_RX = 1
    OP_CNOT = 2
    OP_CZ = 3


cdef void _rz(double* p, Py_ssize_t dim, int q, double theta) noexcept nogil:
    cdef double c = cos(0.5 * theta), s = sin(0.5 * theta)
    cdef uint64_t bit = (<uint64_t>1) << q
    cdef Py_ssize_t k
    cdef double re, im, si
    for k in range(dim):
        re = p[2 * k]
        im = p[2 * k + 1]
        # exp(-i theta/2) on bit 0, exp(+i theta/2) on bit 1
        si = s if ((<uint64_t>k) & bit) else -s
        p[2 * k] = c * re - si * im
        p[2 * k + 1] = c * im + si * re


cdef void _rx(double* p, Py_ssize_t dim, int q, double theta) noexcept nogil:
    cdef double c = cos(0.5 * theta), s = sin(0.5 * theta)
    cdef Py_ssize_t step = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i, j, k0, k1
    cdef double ar, ai, br, bi
    i = 0
    while i < dim:
        for j in range(i, i + step):
            k0 = 2 * j
            k1 = 2 * (j + step)
            ar = p[k0]
            ai = p[k0 + 1]
            br = p[k1]
            bi = p[k1 + 1]
            # [[c, -i s], [-i s, c]]
            p[k0] = c * ar + s * bi
            p[k0 + 1] = c * ai - s * br
            p[k1] = c * br + s * ai
            p[k1 + 1] = c * bi - s * ar
        i += 2 * step


cdef void _cnot(double* p, Py_ssize_t dim, int control, int target) noexcept nogil:
    cdef uint64_t cbit = (<uint64_t>1) << control
    cdef uint64_t tbit = (<uint64_t>1) << target
    cdef Py_ssize_t k, k2
    cdef double tr, ti
    for k in range(dim):
        if ((<uint64_t>k) & cbit) and not ((<uint64_t>k) & tbit):
            k2 = <Py_ssize_t>((<uint64_t>k) | tbit)
            tr = p[2 * k]
            ti = p[2 * k + 1]
            p[2 * k] = p[2 * k2]
            p[2 * k + 1] = p[2 * k2 + 1]
            p[2 * k2] = tr
            p[2 * k2 + 1] = ti


cdef void _cz(double* p, Py_ssize_t dim, int a, int b) noexcept nogil:
    cdef uint64_t mask = ((<uint64_t>1) << a) | ((<uint64_t>1) << b)
    cdef Py_ssize_t k
    for k in range(dim):
        if ((<uint64_t>k) & mask) == mask:
            p[2 * k] = -p[2 * k]
            p[2 * k + 1] = -p[2 * k + 1]


cdef void _op(double* p, Py_ssize_t dim, int kind, int qa, int qb, double theta) noexcept nogil:
    if kind == OP_RZ:
        _rz(p, dim, qa, theta)
    elif kind == OP_RX:
        _rx(p, dim, qa, theta)
    elif kind == OP_CNOT:
        _cnot(p, dim, qa, qb)
    else:
        _cz(p, dim, qa, qb)


def run_circuit(double complex[::1] psi, const int32_t[::1] kinds, const int32_t[::1] qa,
                const int32_t[::1] qb, const int64_t[::1] pidx, const double[::1] theta):
    """Apply the circuit in order; parameterised ops read theta[pidx[k]]."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef double* p = <double*>&psi[0]
    cdef Py_ssize_t k
    cdef double t
    with nogil:
        for k in range(kinds.shape[0]):
            t = theta[pidx[k]] if pidx[k] >= 0 else 0.0
            _op(p, dim, kinds[k], qa[k], qb[k], t)


def adjoint_sweep(double complex[::1] psi, double complex[::1] lam, const int32_t[::1] kinds,
                  const int32_t[::1] qa, const int32_t[::1] qb, const int64_t[::1] pidx,
                  const double[::1] theta, double[::1] grad):
    """Reverse pass: psi is the final state, lam = H psi; both are consumed.

    grad[pidx[k]] = Im <lam_k| G_k |psi_k> with G the rotation generator.
    """
    cdef Py_ssize_t dim = psi.shape[0]
    cdef double* p = <double*>&psi[0]
    cdef double* l = <double*>&lam[0]
    cdef Py_ssize_t k, a
    cdef uint64_t bit
    cdef double acc, t, sg
    with nogil:
        for k in range(kinds.shape[0] - 1, -1, -1):
            t = theta[pidx[k]] if pidx[k] >= 0 else 0.0
            if kinds[k] == OP_RZ or kinds[k] == OP_RX:
                bit = (<uint64_t>1) << qa[k]
                acc = 0.0
                if kinds[k] == OP_RZ:
                    # Im sum conj(l) * sign * p
                    for a in range(dim):
                        sg = -1.0 if ((<uint64_t>a) & bit) else 1.0
                        acc += sg * (l[2 * a] * p[2 * a + 1] - l[2 * a + 1] * p[2 * a])
                else:
                    for a in range(dim):
                        acc += (l[2 * a] * p[2 * (a ^ bit) + 1]
                                - l[2 * a + 1] * p[2 * (a ^ bit)])
                grad[pidx[k]] = acc
            _op(p, dim, kinds[k], qa[k], qb[k], -t)
            _op(l, dim, kinds[k], qa[k], qb[k], -t)
