"""Problem-builder tests: domain handling, basis entries, discrete dualities,
spectrum structure, sum frames, weighted wrappers, and error evaluation."""

import numpy as np
import pytest

from azls import az_solve, default_config, frames, matrixcore as mc
from azls import operators as ops, solvers
from azls.frames import DomainSpec, eval_error, sample_function


def duality_defect(problem):
    za = ops.materialize(ops.compose(ops.adjoint(problem.Z), problem.A))
    return np.max(np.abs(za - np.eye(problem.A.cols)))


class TestDomainSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            DomainSpec.union([])
        with pytest.raises(ValueError):
            DomainSpec.union([[0.5, 0.4]])
        with pytest.raises(ValueError):
            DomainSpec.union([[-0.5, 0.1], [0.0, 0.5]])
        with pytest.raises(ValueError):
            DomainSpec.interval(-1.5, 0.0)

    def test_json_round_trip(self):
        dom = DomainSpec.union([[-0.75, -0.25], [0.0, 0.5]])
        assert DomainSpec.from_json(dom.to_json()).intervals == dom.intervals

    def test_contains_and_measure(self):
        dom = DomainSpec.union([[-0.5, 0.0], [0.25, 0.5]])
        assert np.array_equal(dom.contains_1d(np.array([-0.3, 0.1, 0.3])),
                              [True, False, True])
        assert np.isclose(dom.measure_1d(), 0.75)

    def test_named_masks(self):
        disk = frames.named_mask("disk")
        assert disk.is_2d
        assert bool(disk.mask(np.array(0.0), np.array(0.0)))
        punctured = frames.named_mask("punctured-disk")
        assert not bool(punctured.mask(np.array(0.0), np.array(0.0)))
        assert bool(punctured.mask(np.array(0.5), np.array(0.0)))
        with pytest.raises(ValueError):
            frames.named_mask("triangle")


class TestFourier1d:
    def test_entries(self):
        p = frames.fourier_extension_1d(7, DomainSpec.interval(-0.5, 0.5), 2.0)
        a = ops.materialize(p.A)
        freqs = np.arange(-3, 4)
        expected = np.exp(1j * np.pi * np.outer(p.grid, freqs))
        assert np.max(np.abs(a - expected)) <= 1e-12

    def test_even_n_rejected(self):
        with pytest.raises(ValueError):
            frames.fourier_extension_1d(8, DomainSpec.interval(-0.5, 0.5), 2.0)

    def test_full_domain_exact_dual(self):
        p = frames.fourier_extension_1d(15, DomainSpec.interval(-1.0, 1.0),
                                        2.0, grid_size=15)
        assert duality_defect(p) <= 1e-12
        a = ops.materialize(p.A)
        z = ops.materialize(p.Z)
        assert np.max(np.abs(a - a @ z.conj().T @ a)) <= 1e-11

    def test_clustering_near_sqrt_l(self):
        p = frames.fourier_extension_1d(201, DomainSpec.interval(-0.5, 0.5), 2.0)
        s = np.linalg.svd(ops.materialize(p.A), compute_uv=False)
        sq = np.sqrt(804.0)
        near_top = np.abs(s - sq) <= 0.05 * sq
        near_zero = s <= 0.05 * sq
        # two tight clusters with a thin plunge between them
        assert np.mean(near_top | near_zero) >= 0.8
        assert near_top.sum() >= 80
        sz = np.linalg.svd(ops.materialize(p.Z), compute_uv=False)
        assert np.sum(np.abs(sz - 1 / sq) <= 0.05 / sq) >= 80

    def test_sizing_error(self):
        with pytest.raises(frames.DomainSizingError):
            frames.fourier_extension_1d(15, DomainSpec.interval(-0.5, 0.5),
                                        2.0, grid_size=16)


class TestFourier2d:
    def test_full_mask_exact_dual(self):
        full = DomainSpec.from_mask(
            lambda x, y: np.ones_like(np.asarray(x), dtype=bool))
        p = frames.fourier_extension_2d(5, full, 2.0)
        assert duality_defect(p) <= 1e-12

    def test_adjoint_consistency(self):
        p = frames.fourier_extension_2d(7, frames.named_mask("disk"), 2.0)
        rng = np.random.default_rng(0)
        u = rng.standard_normal(49) + 1j * rng.standard_normal(49)
        v = rng.standard_normal(p.A.rows) + 1j * rng.standard_normal(p.A.rows)
        assert abs(np.vdot(v, p.A.apply(u)) - np.vdot(p.A.adjoint_apply(v), u)) \
            <= 1e-10 * np.linalg.norm(u) * np.linalg.norm(v)

    def test_cluster_fraction_tracks_area(self):
        p = frames.fourier_extension_2d(9, frames.named_mask("disk"), 2.0)
        s = np.linalg.svd(ops.materialize(p.A), compute_uv=False)
        L = 36
        rho = np.pi * 0.8**2 / 4.0
        frac = np.mean(s >= 0.95 * L)
        assert abs(frac - rho) <= 0.15


class TestGram:
    def test_full_interval_identity(self):
        g = frames.gram_fourier(9, DomainSpec.interval(-1.0, 1.0))
        assert np.max(np.abs(g - np.eye(9))) <= 1e-12

    def test_diagonal_half_measure(self):
        dom = DomainSpec.union([[-0.75, -0.25], [0.0, 0.5]])
        g = frames.gram_fourier(11, dom)
        assert np.allclose(np.diagonal(g).real, dom.measure_1d() / 2)

    def test_hermitian_psd(self):
        g = frames.gram_fourier(21, DomainSpec.union([[-0.5, 0.25]]))
        assert np.max(np.abs(g - g.conj().T)) <= 1e-12
        assert np.min(np.linalg.eigvalsh(g)) >= -1e-12

    def test_matches_quadrature(self):
        dom = DomainSpec.union([[-0.6, -0.1], [0.2, 0.7]])
        g = frames.gram_fourier(7, dom)
        freqs = np.arange(-3, 4)
        x = np.concatenate([np.linspace(lo, hi, 20001) for lo, hi in dom.intervals])
        approx = np.empty((7, 7), dtype=complex)
        for i, n in enumerate(freqs):
            for j, m in enumerate(freqs):
                vals = 0.5 * np.exp(1j * np.pi * (n - m) * x)
                approx[i, j] = np.trapezoid(vals.reshape(2, -1),
                                            x.reshape(2, -1), axis=1).sum()
        assert np.max(np.abs(g - approx)) <= 1e-7

    def test_two_cluster_spectrum(self):
        dom = DomainSpec.union([[-0.75, -0.25], [0.0, 0.5]])
        s = np.linalg.svd(frames.gram_fourier(51, dom), compute_uv=False)
        assert np.sum(s >= 0.9) >= 18
        assert np.sum(s <= 0.1) >= 18
        assert np.sum((s > 0.1) & (s < 0.9)) <= 14


class TestChebyshev:
    @pytest.mark.parametrize("kind,L", [("roots", 256), ("extremae", 257)])
    def test_full_grid_duality(self, kind, L):
        p = frames.chebyshev_extension(64, DomainSpec.interval(-1.0, 1.0),
                                       2.0, kind=kind, grid_size=L)
        assert duality_defect(p) <= 1e-11

    def test_entries_are_chebyshev_values(self):
        p = frames.chebyshev_extension(16, DomainSpec.interval(-0.5, 0.5), 2.0)
        a = ops.materialize(p.A)
        nodes = np.asarray(p.grid)
        expected = np.cos(np.outer(np.arccos(nodes), np.arange(16)))
        assert np.max(np.abs(a - expected)) <= 1e-11

    def test_plunge_rank_growth(self):
        prev = None
        for n in (51, 101, 201):
            p = frames.chebyshev_extension(n, DomainSpec.interval(-0.5, 0.5), 2.0)
            a = ops.materialize(p.A)
            z = ops.materialize(p.Z)
            r = mc.eps_rank(a - a @ z.conj().T @ a, 1e-10 * p.scale).r
            if prev is not None:
                assert r - prev <= 10
            prev = r

    def test_approximates_exp(self):
        p = frames.chebyshev_extension(64, DomainSpec.interval(-0.5, 0.5), 2.0)
        b = sample_function(np.exp, p.grid)
        cfg = default_config(p, seed=1, eps=1e-12 * p.scale)
        rep = az_solve(p, b, step1="rand-tsvd", config=cfg)
        assert eval_error(p, rep.x, np.exp)["max_err"] <= 1e-10


class TestLegendre:
    def test_full_grid_duality(self):
        p = frames.legendre_extension(64, DomainSpec.interval(-1.0, 1.0),
                                      grid_size=64)
        assert duality_defect(p) <= 1e-10

    def test_plunge_is_isolated(self):
        p = frames.legendre_extension(40, DomainSpec.interval(-0.5, 0.5), 2.0)
        a = ops.materialize(p.A)
        z = ops.materialize(p.Z)
        r = mc.eps_rank(a - a @ z.conj().T @ a, 1e-8 * p.scale).r
        assert r <= 20

    def test_approximates_exp(self):
        p = frames.legendre_extension(40, DomainSpec.interval(-0.5, 0.5), 2.0)
        b = sample_function(np.exp, p.grid)
        rep = az_solve(p, b, step1="rand-tsvd", config=default_config(p, seed=2))
        assert eval_error(p, rep.x, np.exp)["max_err"] <= 1e-8


class TestSumFrame:
    def test_degenerate_second_weight(self):
        base = frames.chebyshev_extension(8, DomainSpec.interval(-0.5, 0.5), 2.0)
        p = frames.weighted_sum_frame(base, lambda x: np.ones_like(x),
                                      lambda x: np.zeros_like(x))
        za = ops.materialize(ops.compose(ops.adjoint(p.Z), p.A))
        za_base = ops.materialize(ops.compose(ops.adjoint(base.Z), base.A))
        assert np.max(np.abs(za[:8, :8] - za_base)) <= 1e-11
        assert np.max(np.abs(za[8:, :])) <= 1e-11
        assert np.max(np.abs(za[:, 8:])) <= 1e-11

    def test_positivity_required(self):
        base = frames.chebyshev_extension(8, DomainSpec.interval(-0.5, 0.5), 2.0)
        with pytest.raises(ValueError, match="dual frame does not exist"):
            frames.weighted_sum_frame(base, lambda x: np.zeros_like(x),
                                      lambda x: np.zeros_like(x))

    def test_singular_function_approximation(self):
        base = frames.chebyshev_extension(32, DomainSpec.interval(-0.5, 0.5), 2.0)
        p = frames.weighted_sum_frame(base, lambda x: np.ones_like(x), np.abs)
        f = lambda x: np.cos(2 * np.pi * x) + np.abs(x) * np.sin(1 + 2 * np.pi * x)
        b = sample_function(f, p.grid)
        rep = az_solve(p, b, step1="rand-tsvd", config=default_config(p, seed=3))
        assert eval_error(p, rep.x, f)["max_err"] <= 1e-6

    def test_frame_of_frames_composes(self):
        base = frames.chebyshev_extension(16, DomainSpec.interval(-0.5, 0.5), 2.0)
        p = frames.weighted_sum_frame(base, lambda x: 1.0 + 0.0 * x,
                                      lambda x: x**2)
        assert p.A.shape == (base.A.rows, 32)


class TestWeightedWrappers:
    def test_weighted_lsq_callable(self):
        base = frames.fourier_lsq_equispaced(11, 23)
        wp = frames.weighted_lsq(base, lambda x: 1.0 + x, eps_w=0.5)
        assert np.allclose(wp.d, 1.0 + np.asarray(base.grid))

    def test_eps_w_between_levels_zeroes_small_rows(self):
        from azls.azcore import weighted_eps_pinv
        d = np.array([0.1, 0.1, 2.0, 2.0])
        out = weighted_eps_pinv(d, 1.0)
        assert np.allclose(out, [0.0, 0.0, 0.5, 0.5])


class TestSamplingAndErrors:
    def test_in_span_reproduction(self):
        p = frames.fourier_extension_1d(15, DomainSpec.interval(-0.5, 0.5), 2.0)
        phi0 = lambda x: np.ones_like(np.asarray(x), dtype=float)
        b = sample_function(phi0, p.grid)
        cfg = default_config(p, eps=1e-12 * p.scale)
        rep = az_solve(p, b, step1="tsvd", config=cfg)
        assert eval_error(p, rep.x, phi0)["max_err"] <= 1e-12

    def test_gibbs_overshoot_persists(self):
        p = frames.fourier_lsq_equispaced(121, 243)
        f = lambda x: np.sin(2 * np.pi * x) + np.mod(x + 0.5, 1.0) - 0.5
        b = sample_function(f, p.grid)
        x = p.Z.adjoint_apply(b)
        fine = np.linspace(0.45, 0.55, 2001)
        approx = p.evaluate(x, fine)
        err = np.max(np.abs(approx - f(fine)))
        assert err >= 0.05

    def test_refined_grid_finer_and_inside(self):
        dom = DomainSpec.union([[-0.5, -0.1], [0.2, 0.5]])
        p = frames.fourier_extension_1d(21, dom, 2.0)
        pts = frames.refined_grid(p, refine=4)
        assert pts.size >= 4 * np.asarray(p.grid).size * 0.9
        assert np.all(dom.contains_1d(pts))


BUILDERS = [
    lambda: frames.fourier_extension_1d(31, DomainSpec.interval(-0.5, 0.5), 2.0),
    lambda: frames.chebyshev_extension(32, DomainSpec.interval(-0.5, 0.5), 2.0),
    lambda: frames.chebyshev_extension(32, DomainSpec.interval(-0.5, 0.5), 2.0,
                                       kind="extremae"),
    lambda: frames.legendre_extension(32, DomainSpec.interval(-0.5, 0.5), 2.0),
    lambda: frames.fourier_extension_2d(5, frames.named_mask("disk"), 2.0),
]


@pytest.mark.parametrize("build", BUILDERS)
def test_fast_apply_matches_dense(build):
    p = build()
    a = ops.materialize(p.A)
    z = ops.materialize(p.Z)
    rng = np.random.default_rng(1)
    for op, dense in ((p.A, a), (p.Z, z)):
        u = rng.standard_normal(op.cols) + 1j * rng.standard_normal(op.cols)
        v = rng.standard_normal(op.rows) + 1j * rng.standard_normal(op.rows)
        assert np.linalg.norm(op.apply(u) - dense @ u) \
            <= 1e-11 * max(1.0, np.linalg.norm(dense @ u))
        assert np.linalg.norm(op.adjoint_apply(v) - dense.conj().T @ v) \
            <= 1e-11 * max(1.0, np.linalg.norm(dense.conj().T @ v))


def test_restriction_monotonicity():
    # shrinking the domain never shrinks the plunge rank beyond +2 jitter
    n = 41
    ranks = []
    for hi in (0.8, 0.5, 0.3):
        p = frames.fourier_extension_1d(n, DomainSpec.interval(-0.5, hi), 2.0,
                                        grid_size=164)
        a = ops.materialize(p.A)
        z = ops.materialize(p.Z)
        ranks.append(mc.eps_rank(a - a @ z.conj().T @ a, 1e-10 * p.scale).r)
    assert ranks[1] >= ranks[0] - 2
    assert ranks[2] >= ranks[1] - 2
