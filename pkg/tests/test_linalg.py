"""Small-dimension linear algebra: orthonormalization, eigensolve, alignment."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from biconserve.errors import AlignmentError, DegenerateSpanError
from biconserve.linalg import eig_sym2, gram_schmidt, normal_complement, rigid_align

finite = st.floats(min_value=-5, max_value=5, allow_nan=False)


@settings(max_examples=80, deadline=None)
@given(arrays(float, (2, 4), elements=finite))
def test_gram_schmidt_orthonormal_and_spanning(vs):
    # skip nearly dependent inputs; those are the error path tested below
    if np.linalg.matrix_rank(vs, tol=1e-3) < 2:
        return
    q = np.stack(gram_schmidt(vs))
    assert np.allclose(q @ q.T, np.eye(2), atol=1e-10)
    # original vectors lie in the span of the output
    proj = vs - (vs @ q.T) @ q
    assert np.max(np.abs(proj)) < 1e-8 * (1.0 + np.max(np.abs(vs)))


def test_gram_schmidt_rejects_dependent_input():
    vs = np.array([[1.0, 2.0, 0.0, 0.0], [2.0, 4.0, 0.0, 0.0]])
    with pytest.raises(DegenerateSpanError):
        gram_schmidt(vs)


@settings(max_examples=80, deadline=None)
@given(arrays(float, (2, 4), elements=finite))
def test_normal_complement_completes_positive_frame(vs):
    if np.linalg.matrix_rank(vs, tol=1e-3) < 2:
        return
    e1, e2 = gram_schmidt(vs)
    n1, n2 = normal_complement(e1, e2)
    frame = np.stack([e1, e2, n1, n2])
    assert np.allclose(frame @ frame.T, np.eye(4), atol=1e-10)
    assert np.linalg.det(frame) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=120, deadline=None)
@given(finite, finite, finite)
def test_eig_sym2_matches_numpy(a, b, d):
    m = np.array([[a, b], [b, d]])
    (lo, hi), vecs = eig_sym2(m)
    ref = np.linalg.eigvalsh(m)
    scale = 1.0 + np.max(np.abs(m))
    assert lo == pytest.approx(ref[0], abs=1e-12 * scale)
    assert hi == pytest.approx(ref[1], abs=1e-12 * scale)
    for lam, v in zip((lo, hi), vecs.T):
        assert np.linalg.norm(m @ v - lam * v) < 1e-10 * scale
    assert abs(vecs[:, 0] @ vecs[:, 1]) < 1e-12


def _random_rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@pytest.mark.parametrize("seed", [0, 1, 2, 7])
def test_rigid_align_recovers_motion(seed):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((40, 3))
    rot = _random_rotation(rng)
    shift = rng.standard_normal(3)
    moved = pts @ rot.T + shift
    R, t, rmsd = rigid_align(moved, pts)
    assert rmsd < 1e-12
    # rigid_align maps its first cloud onto its second
    assert np.allclose(R, rot.T, atol=1e-10)
    assert np.allclose(moved @ R.T + t, pts, atol=1e-10)
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)


def test_rigid_align_never_reflects():
    # mirrored cloud: best proper-rotation fit must keep det +1 and
    # cannot reach zero rmsd
    rng = np.random.default_rng(3)
    pts = rng.standard_normal((40, 3))
    mirrored = pts * np.array([1.0, 1.0, -1.0])
    R, _, rmsd = rigid_align(mirrored, pts)
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)
    assert rmsd > 1e-2


def test_rigid_align_rejects_collinear():
    line = np.outer(np.linspace(0, 1, 20), [1.0, 2.0, 3.0])
    with pytest.raises(AlignmentError):
        rigid_align(line, line)
