import numpy as np
import pytest
from scipy.optimize import rosen, rosen_der

from excitedvqe.exact import fci_solve
from excitedvqe.optimize import LBFGSOptions, lbfgs, two_loop
from excitedvqe.vqe import (Objective, OptimizationError, RestartPolicy, adjoint_gradient,
                            evaluate, format_progress, gradient, minimize)
from excitedvqe.statesim import expectation

from conftest import fixture_mo, h2_mo, h3_mo, needs_ch2, needs_nh


@pytest.fixture(scope="module")
def h2_uccsd():
    return Objective.from_integrals(h2_mo(), "UCCSD", "S")


def five_point(f, x, h=1e-3):
    out = np.empty(len(x))
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        out[i] = (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)
    return out


class TestEvaluate:
    def test_reference_energy(self, h2_uccsd):
        v, e, s2 = evaluate(h2_uccsd, np.zeros(3))
        ref = expectation(h2_uccsd.reference, h2_uccsd.hamiltonian)
        assert v == e == pytest.approx(ref, abs=1e-12)
        assert s2 == pytest.approx(0.0, abs=1e-12)

    @needs_ch2
    def test_triplet_penalty_adds_forty(self):
        obj = Objective.from_integrals(fixture_mo("CH2", 1.10), "UpCCGSD", "T", penalty=10.0)
        v, e, s2 = evaluate(obj, np.zeros(obj.n_params))
        assert s2 == pytest.approx(2.0, abs=1e-12)
        assert v - e == pytest.approx(40.0, abs=1e-10)

    def test_penalty_decomposition(self):
        obj = Objective.from_integrals(h3_mo(), "UCCSD", "D", penalty=3.0)
        x = np.random.default_rng(0).normal(scale=0.3, size=obj.n_params)
        v, e, s2 = evaluate(obj, x)
        assert v - e == pytest.approx(3.0 * s2 ** 2, abs=1e-10)

    def test_engine_matches_circuit(self):
        obj = Objective.from_integrals(h3_mo(), "UCCGSD", "D")
        x = np.random.default_rng(2).normal(scale=0.3, size=obj.n_params)
        fast = obj.state(x)
        slow = obj.circuit_state(x)
        assert np.allclose(fast.amplitudes, slow.amplitudes, atol=1e-12)

    def test_deterministic(self, h2_uccsd):
        x = np.array([0.1, -0.2, 0.3])
        assert evaluate(h2_uccsd, x) == evaluate(h2_uccsd, x)

    def test_negative_penalty(self):
        with pytest.raises(ValueError):
            Objective.from_integrals(h2_mo(), "UCCSD", "S", penalty=-1.0)


class TestGradient:
    def test_synthetic_quadratic(self):
        A = np.diag([1.0, 2.0, 3.0])
        x = np.array([0.3, -0.1, 0.7])
        g = gradient(None, x, fun=lambda y: 0.5 * y @ A @ y)
        assert np.allclose(g, A @ x, atol=1e-10)

    def test_fd_matches_five_point(self):
        obj = Objective.from_integrals(h3_mo(), "UCCSD", "D", penalty=1.0)
        x = np.random.default_rng(1).normal(scale=0.2, size=obj.n_params)
        f = lambda y: evaluate(obj, y)[0]
        fd, oracle = gradient(obj, x), five_point(f, x)
        assert np.all(np.abs(fd - oracle) <= np.maximum(1e-6 * np.abs(oracle), 1e-9) + 1e-9)

    def test_adjoint_matches_fd(self):
        for fam, reg, p in [("UCCSD", "D", 2.0), ("UCCGS'D", "S", 0.0)]:
            mo = h3_mo() if reg == "D" else h2_mo()
            obj = Objective.from_integrals(mo, fam, reg, n_electrons=3 if reg == "D" else 2, penalty=p)
            x = np.random.default_rng(3).normal(scale=0.3, size=obj.n_params)
            assert np.allclose(adjoint_gradient(obj, x), gradient(obj, x), atol=1e-8)

    def test_brillouin(self, h2_uccsd):
        g = gradient(h2_uccsd, np.zeros(3))
        kinds = [h2_uccsd.mapping.param_excitations(j)[0].kind for j in range(3)]
        singles = [gi for gi, k in zip(g, kinds) if k == "single"]
        doubles = [gi for gi, k in zip(g, kinds) if k == "double"]
        assert np.allclose(singles, 0.0, atol=1e-8)
        assert abs(doubles[0]) > 1e-2

    def test_stationary_at_minimum(self, h2_uccsd):
        res = minimize(h2_uccsd, RestartPolicy(n_restarts=1, r_f=1e-5))
        assert np.linalg.norm(gradient(h2_uccsd, res.params)) < 1e-6


class TestLBFGS:
    def test_quadratic_iterations(self):
        rng = np.random.default_rng(0)
        Q = rng.normal(size=(10, 10))
        A = Q @ Q.T + 10 * np.eye(10)
        b = rng.normal(size=10)
        res = lbfgs(lambda x: (0.5 * x @ A @ x - b @ x, A @ x - b), np.zeros(10))
        assert res.converged
        assert res.iterations <= 15
        assert np.allclose(res.x, np.linalg.solve(A, b), atol=1e-6)

    def test_rosenbrock(self):
        res = lbfgs(lambda x: (rosen(x), rosen_der(x)), np.array([-1.2, 1.0]),
                    LBFGSOptions(max_iter=500, gtol=1e-10))
        assert np.allclose(res.x, [1.0, 1.0], atol=1e-6)

    def test_monotone(self):
        trace = []
        lbfgs(lambda x: (rosen(x), rosen_der(x)), np.array([-1.2, 1.0]),
              callback=lambda it, x, f, g: trace.append(f))
        assert all(b <= a for a, b in zip(trace, trace[1:]))

    def test_two_loop_empty_history(self):
        g = np.array([1.0, -2.0])
        assert np.array_equal(two_loop(g, [], []), g)

    def test_fallback_on_bad_direction(self):
        # nonsmooth |x| forces line-search trouble near the kink but must not increase f
        res = lbfgs(lambda x: (float(np.sum(np.abs(x))), np.sign(x)), np.array([0.3, -0.7]))
        assert res.fun <= 1.0


class TestRestartPolicy:
    def test_default_counts(self):
        obj1 = Objective.from_integrals(h2_mo(), "UpCCGSD", "S")
        assert RestartPolicy().count(obj1.spec) == 1
        assert RestartPolicy().count(obj1.with_k(2).spec) == 8

    def test_start_statistics(self):
        obj = Objective.from_integrals(h2_mo(), "2-UpCCGSD", "S")
        starts = RestartPolicy(n_restarts=400, r_f=1e-2, seed=3).starts(obj.spec, obj.n_params)
        # r_f is the variance of the initial amplitudes
        assert np.var(np.concatenate(starts)) == pytest.approx(1e-2, rel=0.1)

    def test_initial_vector(self):
        obj = Objective.from_integrals(h2_mo(), "UCCSD", "S")
        starts = RestartPolicy(n_restarts=2, initial=(0.1, 0.2, 0.3)).starts(obj.spec, 3)
        assert np.array_equal(starts[0], [0.1, 0.2, 0.3])
        with pytest.raises(ValueError):
            RestartPolicy(initial=(0.1,)).starts(obj.spec, 3)

    @pytest.mark.parametrize("kw", [{"r_f": 0.0}, {"n_restarts": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            RestartPolicy(**kw)


class TestMinimize:
    def test_h2_fci(self, h2_uccsd):
        res = minimize(h2_uccsd, RestartPolicy(n_restarts=1, r_f=1e-5))
        e_fci = fci_solve(h2_mo(), 2, 0.0).energies[0]
        assert res.energy == pytest.approx(e_fci, abs=1e-7)
        assert res.s2_expectation == pytest.approx(0.0, abs=1e-8)
        assert res.n_expectation == pytest.approx(2.0, abs=1e-10)

    def test_h3_doublet_fci(self):
        # minimal basis: no triple excitations exist, so UCCSD reaches FCI
        mo = h3_mo(0.93, "STO-3G")
        res = minimize(Objective.from_integrals(mo, "UCCSD", "D"), RestartPolicy(n_restarts=1, r_f=1e-5))
        assert res.energy == pytest.approx(fci_solve(mo, 3, 0.5).energies[0], abs=1e-6)

    def test_h3_doublet_variational_631g(self):
        obj = Objective.from_integrals(h3_mo(), "UCCSD", "D")
        res = minimize(obj, RestartPolicy(n_restarts=1, r_f=1e-5))
        e_fci = fci_solve(h3_mo(), 3, 0.5).energies[0]
        assert e_fci - 1e-9 <= res.energy <= e_fci + 1e-3

    def test_bit_identical_reruns(self):
        obj = Objective.from_integrals(h3_mo(), "2-UpCCGSD", "D")
        pol = RestartPolicy(n_restarts=2, seed=11)
        a, b = minimize(obj, pol), minimize(obj, pol)
        assert a.e_vqe == b.e_vqe
        assert np.array_equal(a.params, b.params)
        assert [r.e_vqe for r in a.restarts] == [r.e_vqe for r in b.restarts]

    def test_scipy_backend_agrees(self, h2_uccsd):
        ours = minimize(h2_uccsd, RestartPolicy(n_restarts=1, r_f=1e-5))
        ref = minimize(h2_uccsd, RestartPolicy(n_restarts=1, r_f=1e-5), method="L-BFGS-B")
        assert ours.energy == pytest.approx(ref.energy, abs=1e-9)

    def test_fd_mode(self, h2_uccsd):
        res = minimize(h2_uccsd, RestartPolicy(n_restarts=1, r_f=1e-5), grad_mode="fd")
        assert res.energy == pytest.approx(fci_solve(h2_mo(), 2, 0.0).energies[0], abs=1e-7)

    def test_progress_log(self, h2_uccsd):
        lines = []
        minimize(h2_uccsd, RestartPolicy(n_restarts=1), log=lines.append)
        assert lines[0].startswith("restart   0 iter     0 ")
        assert len(lines[0]) == len(format_progress(0, 0, 0.0, 0.0, 0.0, 0.0))

    def test_all_restarts_failed(self, h2_uccsd, monkeypatch):
        from excitedvqe import vqe

        def boom(*a, **k):
            raise OptimizationError("synthetic")
        monkeypatch.setattr(vqe, "_run_one", boom)
        with pytest.raises(OptimizationError):
            minimize(h2_uccsd, RestartPolicy(n_restarts=2))

    def test_failed_restart_excluded(self, h2_uccsd, monkeypatch):
        from excitedvqe import vqe
        real = vqe._run_one

        def flaky(obj, x0, index, *rest):
            if index == 0:
                raise FloatingPointError("synthetic")
            return real(obj, x0, index, *rest)
        monkeypatch.setattr(vqe, "_run_one", flaky)
        res = minimize(h2_uccsd, RestartPolicy(n_restarts=2))
        assert res.failed_restarts == [0]
        assert res.restart_index == 1

    def test_k_embedding_monotone(self):
        obj = Objective.from_integrals(h3_mo(), "UpCCGSD", "D")
        r1 = minimize(obj, RestartPolicy(n_restarts=1))
        obj2 = obj.with_k(2)
        seeded = RestartPolicy(n_restarts=1, initial=tuple(obj.mapping.embed(r1.params, 2)))
        r2 = minimize(obj2, seeded)
        assert r2.e_vqe <= r1.e_vqe + 1e-9

    def test_penalty_release(self):
        # converged singlet with a penalty: dropping it barely moves E
        obj = Objective.from_integrals(h2_mo(), "UCCGSD", "S", penalty=10.0)
        res = minimize(obj, RestartPolicy(n_restarts=1))
        v, e, s2 = evaluate(obj.with_penalty(0.0), res.params)
        assert s2 < 1e-6
        assert abs(res.e_vqe - e) <= 10.0 * s2 ** 2 + 1e-12


@needs_nh
class TestPenaltyOnNH:
    """UCCGD from the open-shell singlet register, held near S = 0 by the penalty."""

    def mo(self):
        return fixture_mo("NH", 1.0)

    def test_residual_contamination_at_p10(self):
        obj = Objective.from_integrals(self.mo(), "UCCGD", "S3", penalty=10.0)
        res = minimize(obj, RestartPolicy(n_restarts=1))
        assert res.s2_expectation < 1e-3

    def test_residual_scales_inverse_with_penalty(self):
        # stationarity of E - a s + p s^2 gives s = a / (2p): p * <S^2> stays fixed
        products = []
        for p in (10.0, 40.0):
            obj = Objective.from_integrals(self.mo(), "UCCGD", "S3", penalty=p)
            res = minimize(obj, RestartPolicy(n_restarts=1))
            products.append(p * res.s2_expectation)
        assert products[1] == pytest.approx(products[0], rel=0.02)
