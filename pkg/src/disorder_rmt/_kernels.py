"""Compiled inner loops.

All kernels take pre-drawn arrays (or a numpy Generator, for the SDE) so
results depend only on the random stream, never on the kernel.  Logs are
accumulated with Neumaier compensated summation into per-batch slots.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _kadd(sums, comps, b, y):
    s = sums[b]
    t = s + y
    if abs(s) >= abs(y):
        comps[b] += (s - t) + y
    else:
        comps[b] += (y - t) + s
    sums[b] = t


@njit(cache=True, nogil=True)
def telescope(a, b, c, d, u, start, batch_len, sums, comps, every):
    """Telescopic log-growth of a unit vector under the matrices ``(a,b,c,d)``.

    `u` (length 2) is updated in place.  Logs of the stretch are added to
    ``sums[(start + i) // batch_len]`` every `every` steps and at batch ends.
    Returns 0 on success, or ``1 + i`` at the first zero/non-finite norm.
    """
    nb = sums.size
    u0 = u[0]
    u1 = u[1]
    pending = 0
    for i in range(a.size):
        g = start + i
        v0 = a[i] * u0 + b[i] * u1
        v1 = c[i] * u0 + d[i] * u1
        u0 = v0
        u1 = v1
        pending += 1
        if pending >= every or (g + 1) % batch_len == 0 or i == a.size - 1:
            r = math.sqrt(u0 * u0 + u1 * u1)
            if not (r > 0.0 and r < np.inf):
                return 1 + i
            bi = g // batch_len
            if bi >= nb:
                bi = nb - 1
            _kadd(sums, comps, bi, math.log(r))
            u0 /= r
            u1 /= r
            pending = 0
    u[0] = u0
    u[1] = u1
    return 0


@njit(cache=True, nogil=True)
def telescope_frobenius(a, b, c, d, P, start, batch_len, sums, comps):
    """Log-growth of the Frobenius norm of the running product ``A_n ... A_1``.

    `P` (length 4, row-major) holds the normalized product and is updated in
    place.
    """
    nb = sums.size
    p11, p12, p21, p22 = P[0], P[1], P[2], P[3]
    for i in range(a.size):
        g = start + i
        q11 = a[i] * p11 + b[i] * p21
        q12 = a[i] * p12 + b[i] * p22
        q21 = c[i] * p11 + d[i] * p21
        q22 = c[i] * p12 + d[i] * p22
        r = math.sqrt(q11 * q11 + q12 * q12 + q21 * q21 + q22 * q22)
        if not (r > 0.0 and r < np.inf):
            return 1 + i
        bi = g // batch_len
        if bi >= nb:
            bi = nb - 1
        _kadd(sums, comps, bi, math.log(r))
        p11 = q11 / r
        p12 = q12 / r
        p21 = q21 / r
        p22 = q22 / r
    P[0] = p11
    P[1] = p12
    P[2] = p21
    P[3] = p22
    return 0


@njit(cache=True, nogil=True)
def projective_chain(a, b, c, d, u, out0, out1):
    """Iterate the unit vector `u`, recording it before each step."""
    u0 = u[0]
    u1 = u[1]
    rec = out0.size > 0
    for i in range(a.size):
        if rec:
            out0[i] = u0
            out1[i] = u1
        v0 = a[i] * u0 + b[i] * u1
        v1 = c[i] * u0 + d[i] * u1
        r = math.sqrt(v0 * v0 + v1 * v1)
        u0 = v0 / r
        u1 = v1 / r
    u[0] = u0
    u[1] = u1


@njit(cache=True, nogil=True)
def run_cells(ell, v, E, state, bidx, lsums, lcomps, nodes, use_prufer,
              edges, hcounts, hmoments, tails, zout):
    """Propagate ``(psi', psi)`` through impurity cells.

    Cell j applies the kick ``psi' += v[j] psi`` and then free motion over
    ``ell[j]`` at energy `E`.  ``state = [psi', psi, sign_prev]`` is updated
    in place; the vector is renormalized each cell with the log of the norm
    added to ``lsums[bidx[j]]`` and zeros of psi added to ``nodes[bidx[j]]``.

    Zeros are counted by the Pruefer phase for ``E > 0`` when `use_prufer`
    is set, else by sign changes of psi at the cell ends.  If ``edges`` is
    nonempty, the slope ``psi'/psi`` before each kick is histogrammed
    (``hcounts``, first moments ``hmoments``, ``tails = [below, above]``);
    if ``zout`` is nonempty it receives those slopes.
    """
    p = state[0]
    q = state[1]
    sprev = state[2]
    nbins = edges.size - 1
    rec_hist = nbins > 0
    rec_z = zout.size > 0
    k = math.sqrt(E) if E > 0.0 else (math.sqrt(-E) if E < 0.0 else 0.0)
    for j in range(ell.size):
        z = p / q if q != 0.0 else np.inf
        if rec_z:
            zout[j] = z
        if rec_hist:
            if z < edges[0] or z == -np.inf:
                tails[0] += 1
            elif z >= edges[nbins] or z == np.inf:
                tails[1] += 1
            else:
                ib = np.searchsorted(edges, z, side="right") - 1
                hcounts[ib] += 1
                hmoments[ib] += z
        p = p + v[j] * q
        L = ell[j]
        bj = bidx[j]
        if E > 0.0:
            cs = math.cos(k * L)
            sn = math.sin(k * L)
            if use_prufer:
                phi = math.atan2(k * q, p)
                if phi < 0.0:
                    phi += math.pi
                if phi >= math.pi:
                    phi -= math.pi
                nodes[bj] += math.floor((phi + k * L) / math.pi)
            pn = cs * p - k * sn * q
            qn = sn / k * p + cs * q
        elif E < 0.0:
            ch = math.cosh(k * L)
            sh = math.sinh(k * L)
            pn = ch * p + k * sh * q
            qn = sh / k * p + ch * q
        else:
            pn = p
            qn = L * p + q
        if not (E > 0.0 and use_prufer):
            if qn != 0.0:
                s = 1.0 if qn > 0.0 else -1.0
                if s != sprev:
                    nodes[bj] += 1
                sprev = s
        r = math.sqrt(pn * pn + qn * qn)
        _kadd(lsums, lcomps, bj, math.log(r))
        p = pn / r
        q = qn / r
    state[0] = p
    state[1] = q
    state[2] = sprev


@njit(cache=True, nogil=True)
def sde_euler(gen, z0, E, sigma, dt, nsteps, zmax, edges, hcounts, hmoments, tails,
              passages, max_passages, t_reinject):
    """Euler-Maruyama for ``dZ = -(Z^2 + E) dt + sqrt(sigma) dW`` with reinjection.

    When Z drops below ``-zmax`` a crossing is recorded, the passage time
    (measured from the previous reinjection, plus the deterministic transit
    time `t_reinject` spent beyond ``+-zmax``) is stored in `passages`, and
    Z restarts at ``+zmax``.

    Returns ``(z, crossings, integral of Z dt, big_moves, n_passages_stored,
    elapsed since last reinjection)``.
    """
    z = z0
    sq = math.sqrt(sigma * dt)
    crossings = 0
    zint = 0.0
    zint_c = 0.0
    big = 0
    nbins = edges.size - 1
    rec_hist = nbins > 0
    tlast = 0.0
    npass = 0
    half = 0.5 * zmax
    for i in range(nsteps):
        if rec_hist:
            if z < edges[0]:
                tails[0] += 1
            elif z >= edges[nbins]:
                tails[1] += 1
            else:
                ib = np.searchsorted(edges, z, side="right") - 1
                hcounts[ib] += 1
                hmoments[ib] += z
        y = z * dt
        t = zint + y
        if abs(zint) >= abs(y):
            zint_c += (zint - t) + y
        else:
            zint_c += (y - t) + zint
        zint = t
        zn = z - (z * z + E) * dt + sq * gen.standard_normal()
        if abs(zn - z) > half:
            big += 1
        tlast += dt
        if zn < -zmax:
            crossings += 1
            if npass < max_passages:
                passages[npass] = tlast + t_reinject
                npass += 1
            tlast = 0.0
            zn = zmax
        z = zn
    return z, crossings, zint + zint_c, big, npass, tlast


@njit(cache=True, nogil=True)
def scatter_back(ell, v, out):
    """Backward sweep of a scattering sample at ``k = 1``.

    Starts from ``(psi', psi) = (i, 1)`` at the right end and applies
    ``A_j^{-1}`` for ``j = n .. 0``; the product ``A_n ... A_0`` is built in
    the same pass.  Both are renormalized, with logs of the scales kept.
    `out` receives ``[Re a, Im a, Re b, Im b, log scale, log |Pi|_F^2,
    min Im X / |X|_chordal]`` where ``(a, b)`` is the left state.
    """
    a = 1j
    b = 1.0 + 0j
    ls = 0.0
    p11, p12, p21, p22 = 1.0, 0.0, 0.0, 1.0
    lf = 0.0
    imin = np.inf
    for j in range(ell.size - 1, -1, -1):
        c = math.cos(ell[j])
        s = math.sin(ell[j])
        # F(-ell) = [[c, s], [-s, c]], then the inverse kick
        na = c * a + s * b
        nb = -s * a + c * b
        na = na - v[j] * nb
        r = math.sqrt(na.real * na.real + na.imag * na.imag + nb.real * nb.real + nb.imag * nb.imag)
        a = na / r
        b = nb / r
        ls += math.log(r)
        im = (a * b.conjugate()).imag
        if im < imin:
            imin = im
        # product P <- P @ A_j with A_j = F(ell) @ [[1, v], [0, 1]]
        m11 = c
        m12 = c * v[j] - s
        m21 = s
        m22 = s * v[j] + c
        q11 = p11 * m11 + p12 * m21
        q12 = p11 * m12 + p12 * m22
        q21 = p21 * m11 + p22 * m21
        q22 = p21 * m12 + p22 * m22
        rf = math.sqrt(q11 * q11 + q12 * q12 + q21 * q21 + q22 * q22)
        p11 = q11 / rf
        p12 = q12 / rf
        p21 = q21 / rf
        p22 = q22 / rf
        lf += 2.0 * math.log(rf)
    out[0] = a.real
    out[1] = a.imag
    out[2] = b.real
    out[3] = b.imag
    out[4] = ls
    out[5] = lf
    out[6] = imin


@njit(cache=True, nogil=True)
def backward_walk(ell, v, P, z1, z2, tol):
    """Right-multiply ``P`` by ``A_j^{-1}`` until ``P(z1)`` and ``P(z2)`` agree.

    Agreement is measured by the chordal distance on the Riemann sphere.
    `P` (row-major, renormalized) is updated in place.  Returns the number
    of cells used, or -1 if `ell` ran out first.
    """
    p11, p12, p21, p22 = P[0], P[1], P[2], P[3]
    for j in range(ell.size):
        c = math.cos(ell[j])
        s = math.sin(ell[j])
        # A^{-1} = [[1, -v], [0, 1]] @ [[c, s], [-s, c]]
        m11 = c + v[j] * s
        m12 = s - v[j] * c
        m21 = -s
        m22 = c
        q11 = p11 * m11 + p12 * m21
        q12 = p11 * m12 + p12 * m22
        q21 = p21 * m11 + p22 * m21
        q22 = p21 * m12 + p22 * m22
        r = math.sqrt(q11 * q11 + q12 * q12 + q21 * q21 + q22 * q22)
        p11 = q11 / r
        p12 = q12 / r
        p21 = q21 / r
        p22 = q22 / r
        n1 = p11 * z1 + p12
        d1 = p21 * z1 + p22
        n2 = p11 * z2 + p12
        d2 = p21 * z2 + p22
        num = abs(n1 * d2 - n2 * d1)
        den = math.sqrt((abs(n1) ** 2 + abs(d1) ** 2) * (abs(n2) ** 2 + abs(d2) ** 2))
        if num <= tol * den:
            P[0], P[1], P[2], P[3] = p11, p12, p21, p22
            return j + 1
    P[0], P[1], P[2], P[3] = p11, p12, p21, p22
    return -1
