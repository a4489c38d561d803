"""Fixed-dimension linear algebra helpers.

Covers the handful of primitives the geometry pipeline needs: Gram-Schmidt
orthonormalization in E4, the orthogonal complement of a tangent 2-plane,
a closed-form symmetric 2x2 eigensolve, and proper rigid alignment of point
clouds (orthogonal Procrustes / Kabsch) for congruence certification.
"""

from __future__ import annotations

import numpy as np

from .errors import AlignmentError, DegenerateSpanError


def gram_schmidt(vectors, tol: float = 1e-10):
    """Orthonormalize a list of vectors (modified Gram-Schmidt, two passes).

    The first output is parallel to the first input with a positive factor.
    Raises DegenerateSpanError when the inputs are numerically dependent
    (smallest Gram eigenvalue below ``tol`` times the largest).
    """
    vs = [np.asarray(v, dtype=float) for v in vectors]
    if not vs:
        return []
    gram = np.array([[float(a @ b) for b in vs] for a in vs])
    w = np.linalg.eigvalsh(gram)
    if w[0] <= tol * max(w[-1], np.finfo(float).tiny):
        raise DegenerateSpanError(
            f"input vectors nearly dependent (Gram eigenvalue ratio "
            f"{w[0] / max(w[-1], np.finfo(float).tiny):.3e})")
    out = []
    for v in vs:
        u = v.copy()
        for _ in range(2):  # re-orthogonalization pass kills roundoff drift
            for e in out:
                u = u - (u @ e) * e
        out.append(u / np.linalg.norm(u))
    return out


def normal_complement(e1, e2):
    """Orthonormal basis (n1, n2) of the plane orthogonal to span{e1, e2} in E4.

    The 4-frame (e1, e2, n1, n2) is ordered with determinant +1.
    """
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    _, _, vt = np.linalg.svd(np.stack([e1, e2]))
    n1, n2 = vt[2], vt[3]
    if np.linalg.det(np.stack([e1, e2, n1, n2])) < 0.0:
        n2 = -n2
    return n1, n2


def eig_sym2(m):
    """Eigenvalues (ascending) and unit eigenvectors of a symmetric 2x2 matrix.

    Closed-form, cancellation-safe: half-trace +/- hypot of the half-gap and
    the off-diagonal entry.
    """
    m = np.asarray(m, dtype=float)
    a, b, d = m[0, 0], 0.5 * (m[0, 1] + m[1, 0]), m[1, 1]
    half = 0.5 * (a + d)
    disc = np.hypot(0.5 * (a - d), b)
    lo, hi = half - disc, half + disc
    if disc == 0.0:
        vecs = np.eye(2)
    else:
        # Eigenvector for hi from whichever expression avoids cancellation.
        if abs(hi - a) >= abs(hi - d):
            v = np.array([b, hi - a])
        else:
            v = np.array([hi - d, b])
        n = np.linalg.norm(v)
        if n == 0.0:
            v = np.array([1.0, 0.0])
            n = 1.0
        v_hi = v / n
        v_lo = np.array([-v_hi[1], v_hi[0]])
        vecs = np.stack([v_lo, v_hi], axis=1)
    return (lo, hi), vecs


def rigid_align(cloud_a, cloud_b, degeneracy_tol: float = 1e-9):
    """Proper rigid motion (R, t) minimizing RMS deviation of R a + t vs b.

    Reflections are excluded (det R = +1).  Returns (R, t, rmsd).
    """
    a = np.asarray(cloud_a, dtype=float)
    b = np.asarray(cloud_b, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[1] != 3:
        raise AlignmentError("clouds must be equal-size (n, 3) arrays")
    if a.shape[0] < 3:
        raise AlignmentError("need at least 3 points for rigid alignment")
    ca, cb = a.mean(axis=0), b.mean(axis=0)
    ac, bc = a - ca, b - cb
    sv = np.linalg.svd(ac, compute_uv=False)
    if sv[1] <= degeneracy_tol * max(sv[0], np.finfo(float).tiny):
        raise AlignmentError("cloud is (near-)collinear; alignment ill-posed")
    h = ac.T @ bc
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    if d == 0.0:
        d = 1.0
    corr = np.diag([1.0, 1.0, d])
    rot = vt.T @ corr @ u.T
    t = cb - rot @ ca
    diff = (a @ rot.T + t) - b
    rmsd = float(np.sqrt(np.mean(np.sum(diff * diff, axis=1))))
    return rot, t, rmsd
