"""Backend selection and numba/numpy agreement."""

import numpy as np
import pytest

import rkfd
from rkfd._kernels import plan_kernels, requested_backend
from rkfd.integrate import BackendError, rk_integrate_reduced, rkfd_integrate

needs_numba = pytest.mark.skipif(
    not rkfd.numba_available(), reason="numba not importable")


class CallableRhs:
    """A rhs the compiled backend cannot take: a class instance, not a function."""

    def __call__(self, x, y):
        out = np.empty_like(y)
        out[0] = -y[0]
        return out


def instance_problem():
    return rkfd.Ivp4(name="instance", f=CallableRhs(), x0=0.0, x_end=1.0,
                     y0=[1.0], dy0=[0.0], d2y0=[0.0], d3y0=[0.0])


class TestRequestedBackend:
    def test_default_is_auto(self, monkeypatch):
        monkeypatch.delenv(rkfd.BACKEND_ENV, raising=False)
        assert requested_backend() == "auto"

    def test_env_variable_is_read(self, monkeypatch):
        monkeypatch.setenv(rkfd.BACKEND_ENV, "numpy")
        assert requested_backend() == "numpy"
        monkeypatch.setenv(rkfd.BACKEND_ENV, " NUMBA ")
        assert requested_backend() == "numba"

    def test_override_beats_env(self, monkeypatch):
        monkeypatch.setenv(rkfd.BACKEND_ENV, "numpy")
        assert requested_backend("auto") == "auto"

    def test_unknown_value_rejected(self, monkeypatch):
        with pytest.raises(BackendError, match="unknown backend"):
            requested_backend("fortran")
        monkeypatch.setenv(rkfd.BACKEND_ENV, "gpu")
        with pytest.raises(BackendError, match="unknown backend"):
            requested_backend()


class TestPlanKernels:
    def test_numpy_backend_always_works(self, p2):
        plan = plan_kernels(p2.f, "numpy")
        assert plan.backend == "numpy"
        assert plan.rhs is p2.f

    @needs_numba
    def test_auto_compiles_module_level_rhs(self, p2):
        plan = plan_kernels(p2.f, "auto")
        assert plan.backend == "numba"

    @needs_numba
    def test_auto_falls_back_for_uncompilable_rhs(self):
        plan = plan_kernels(CallableRhs(), "auto")
        assert plan.backend == "numpy"

    @needs_numba
    def test_forced_numba_rejects_uncompilable_rhs(self):
        with pytest.raises(BackendError, match="does not compile"):
            plan_kernels(CallableRhs(), "numba")


class TestRunBackends:
    def test_result_records_the_backend(self, tab5, p2):
        res = rkfd_integrate(tab5, p2, 0.1, backend="numpy")
        assert res.backend == "numpy"

    def test_env_selection_applies_to_runs(self, tab5, p2, monkeypatch):
        monkeypatch.setenv(rkfd.BACKEND_ENV, "numpy")
        assert rkfd_integrate(tab5, p2, 0.1).backend == "numpy"

    @needs_numba
    def test_auto_uses_numba_for_builtin_problems(self, tab5, p2):
        assert rkfd_integrate(tab5, p2, 0.1, backend="auto").backend == "numba"

    def test_instance_rhs_runs_on_numpy(self, tab5):
        res = rkfd_integrate(tab5, instance_problem(), 0.25, backend="auto")
        assert res.backend == "numpy"
        assert res.n_steps == 4

    @needs_numba
    def test_instance_rhs_rejected_when_numba_forced(self, tab5):
        with pytest.raises(BackendError):
            rkfd_integrate(tab5, instance_problem(), 0.25, backend="numba")

    @needs_numba
    @pytest.mark.parametrize("prob_name", ["p2", "p4"])
    def test_backends_agree_direct(self, tab5, prob_name):
        prob = rkfd.get_problem(prob_name)
        a = rkfd_integrate(tab5, prob, 0.1, backend="numba")
        b = rkfd_integrate(tab5, prob, 0.1, backend="numpy")
        assert a.backend == "numba" and b.backend == "numpy"
        for grids in (("ys",), ("dys",), ("d2ys",), ("d3ys",)):
            for g in grids:
                assert np.max(np.abs(getattr(a, g) - getattr(b, g))) <= 1e-11
        assert np.array_equal(a.xs, b.xs)
        assert a.n_fevals == b.n_fevals

    @needs_numba
    @pytest.mark.parametrize("prob_name", ["p2", "p4"])
    def test_backends_agree_reduction(self, rk4, prob_name):
        prob = rkfd.get_problem(prob_name)
        a = rk_integrate_reduced(rk4, prob, 0.1, backend="numba")
        b = rk_integrate_reduced(rk4, prob, 0.1, backend="numpy")
        assert np.max(np.abs(a.ys - b.ys)) <= 1e-11
        assert np.max(np.abs(a.d3ys - b.d3ys)) <= 1e-11

    def test_invalid_backend_value_raises(self, tab5, p2):
        with pytest.raises(BackendError):
            rkfd_integrate(tab5, p2, 0.1, backend="cuda")
