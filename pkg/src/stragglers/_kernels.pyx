# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-chunk job simulation; mirrors ``_kernels_py.simulate_chunk``."""
from libc.math cimport INFINITY
from libc.stdint cimport int64_t
from libc.stdlib cimport malloc, free, qsort

cdef enum:
    MODE_CODE = 2


cdef int _cmp(const void* a, const void* b) noexcept nogil:
    cdef double da = (<const double*>a)[0]
    cdef double db = (<const double*>b)[0]
    return (da > db) - (da < db)


cdef void _sort(double* a, Py_ssize_t m) noexcept nogil:
    # insertion sort beats qsort's callback overhead for the short buffers here
    cdef Py_ssize_t i, j
    cdef double v
    if m > 32:
        qsort(a, m, sizeof(double), _cmp)
        return
    for i in range(1, m):
        v = a[i]
        j = i - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v


def simulate_chunk(const double[:, ::1] x, const double[:, ::1] y, int mode, int c, int n,
                   double delta, bint relaunch, double[::1] lat, double[::1] cc,
                   double[::1] cn, int64_t[::1] nrel):
    cdef Py_ssize_t runs = x.shape[0], k = x.shape[1]
    cdef Py_ssize_t r
    cdef double* buf = <double*>malloc((n + k + 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(runs):
                if mode == MODE_CODE:
                    _coded_run(&x[r, 0], &y[r, 0] if y.shape[1] > 0 else NULL, k, n, delta,
                               relaunch, buf, &lat[r], &cc[r], &cn[r], &nrel[r])
                else:
                    _replicated_run(&x[r, 0], &y[r, 0] if y.shape[1] > 0 else NULL, k, c, delta,
                                    relaunch, &lat[r], &cc[r], &cn[r], &nrel[r])
    finally:
        free(buf)


cdef void _replicated_run(const double* x, const double* y, Py_ssize_t k, int c, double delta,
                          bint relaunch, double* lat, double* cc, double* cn, int64_t* nrel) noexcept nogil:
    cdef Py_ssize_t i, j, w = c + 1 if relaunch else c
    cdef double fin, first, tot, T = 0.0, scc = 0.0, scn = 0.0
    cdef int64_t late = 0
    for i in range(k):
        if x[i] >= delta:
            late += 1
    for i in range(k):
        if late == 0 or x[i] < delta:
            # jobs finishing before the delay never see redundancy
            fin = x[i]
            scc += x[i]
            scn += x[i]
        else:
            first = INFINITY
            tot = 0.0
            for j in range(w):
                if y[i * w + j] < first:
                    first = y[i * w + j]
                tot += y[i * w + j]
            fin = delta + first
            if relaunch:
                scc += delta + (c + 1) * first
                scn += delta + tot
            else:
                if x[i] < fin:
                    fin = x[i]
                scc += fin + c * (fin - delta)
                scn += x[i] + tot
        if fin > T:
            T = fin
    lat[0] = T
    cc[0] = scc
    cn[0] = scn
    nrel[0] = late if relaunch else 0


cdef void _coded_run(const double* x, const double* y, Py_ssize_t k, int n, double delta,
                     bint relaunch, double* buf, double* lat, double* cc, double* cn,
                     int64_t* nrel) noexcept nogil:
    cdef Py_ssize_t i, m = 0, need = 0, npar = n - k
    cdef double T = 0.0, pre = 0.0, scc = 0.0, scn = 0.0, f, s
    cdef const double* parity
    for i in range(k):
        if x[i] >= delta:
            need += 1
    if need == 0:
        for i in range(k):
            if x[i] > T:
                T = x[i]
            pre += x[i]
        lat[0] = T
        cc[0] = pre
        cn[0] = pre
        nrel[0] = 0
        return
    parity = y + k if relaunch else y
    for i in range(k):
        if x[i] < delta:
            pre += x[i]
        else:
            if relaunch:
                pre += delta
                buf[m] = delta + y[i]
            else:
                buf[m] = x[i]
            m += 1
    for i in range(npar):
        buf[m] = delta + parity[i]
        m += 1
    _sort(buf, m)
    # k-th completion overall is the need-th among the running tasks
    T = buf[need - 1]
    for i in range(k):
        if x[i] >= delta:
            if relaunch:
                f = delta + y[i]
                s = delta
            else:
                f = x[i]
                s = 0.0
            scc += (f if f < T else T) - s
            scn += f - s
    for i in range(npar):
        f = delta + parity[i]
        scc += (f if f < T else T) - delta
        scn += f - delta
    lat[0] = T
    cc[0] = pre + scc
    cn[0] = pre + scn
    nrel[0] = need if relaunch else 0
