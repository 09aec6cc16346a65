import math

import numpy as np
import pytest

from panel_logit_moments.exact_linalg import Q
from panel_logit_moments.gmm_mc import (
    BasisDimensionError,
    SimConfig,
    UnidentifiedModelError,
    estimate_gmm,
    float_moment_basis,
    float_prob_rows,
    make_objective,
    monte_carlo,
    simulate_panel,
)
from panel_logit_moments.model_core import ModelSpec
from panel_logit_moments.moment_space import default_budget, moment_basis

SPEC13 = ModelSpec(1, 3, (0,))


class TestSimulation:
    def test_fair_coin_limit(self):
        cfg = SimConfig(N=10000, spec=SPEC13, true_gamma=(0.0,),
                        alpha_dist=("degenerate", 0.0), seed=1)
        data = simulate_panel(cfg)
        assert abs(data.y.mean() - 0.5) < 3 / math.sqrt(10000 * 3)

    def test_determinism(self):
        cfg = SimConfig(N=500, spec=SPEC13, true_gamma=(0.7,), seed=42)
        a, b = simulate_panel(cfg), simulate_panel(cfg)
        assert np.array_equal(a.y, b.y) and np.array_equal(a.init, b.init)

    def test_strong_state_dependence(self):
        cfg = SimConfig(N=10000, spec=SPEC13, true_gamma=(5.0,),
                        alpha_dist=("degenerate", 0.0), init_scheme=("fixed", 1), seed=2)
        data = simulate_panel(cfg)
        assert abs(data.y[:, 0].mean() - 1 / (1 + math.exp(-5))) < 0.01

    def test_random_init_scheme(self):
        cfg = SimConfig(N=4000, spec=SPEC13, true_gamma=(0.5,),
                        init_scheme=("random_bernoulli", 0.3), seed=3)
        data = simulate_panel(cfg)
        assert abs(data.init.mean() - 0.3) < 0.05


class TestFloatBasis:
    def test_dimension_matches_exact(self):
        basis = float_moment_basis(SPEC13, (math.log(2),))
        assert basis.shape == (8, 2)

    def test_T2_empty(self):
        basis = float_moment_basis(ModelSpec(1, 2, (0,)), (0.5,))
        assert basis.shape == (4, 0)

    def test_matches_exact_basis(self):
        # gamma = ln 2 corresponds exactly to c = 2 in the exact lane
        exact = moment_basis(SPEC13, (Q(2),), None, default_budget(1, 3, True))
        exact_f = np.array(
            [[int(x.numerator) / int(x.denominator) for x in row] for row in exact.basis.data]
        )
        basis = float_moment_basis(SPEC13, (math.log(2),))
        assert np.abs(basis - exact_f).max() < 1e-8

    def test_validity_transfer_on_alpha_grid(self):
        basis = float_moment_basis(SPEC13, (0.5,))
        rows = float_prob_rows(SPEC13, (0.5,), None, np.linspace(-6, 6, 25))
        assert np.abs(rows @ basis).max() < 1e-8

    def test_deterministic(self):
        a = float_moment_basis(SPEC13, (0.3,))
        b = float_moment_basis(SPEC13, (0.3,))
        assert np.array_equal(a, b)

    def test_ar2_dimension(self):
        basis = float_moment_basis(ModelSpec(2, 4, (0, 0)), (0.4, 0.2))
        assert basis.shape == (16, 6)

    def test_degenerate_gamma_raises(self):
        with pytest.raises(BasisDimensionError):
            float_moment_basis(SPEC13, (0.0,))


class TestEstimate:
    def test_recovers_truth_within_envelope(self):
        cfg = SimConfig(N=2000, spec=SPEC13, true_gamma=(0.5,),
                        alpha_dist=("normal", 0, 1), seed=7)
        result = estimate_gmm(simulate_panel(cfg), SPEC13)
        assert abs(result.gamma_hat[0] - 0.5) < 0.15

    def test_objective_smaller_at_truth(self):
        cfg = SimConfig(N=20000, spec=SPEC13, true_gamma=(0.5,),
                        alpha_dist=("normal", 0, 1), seed=9)
        objective = make_objective(simulate_panel(cfg), SPEC13)
        assert objective((0.5,)) < objective((-0.5,))
        assert objective((0.5,)) < objective((1.5,))
        assert objective((0.5,)) >= 0

    def test_deterministic(self):
        cfg = SimConfig(N=1000, spec=SPEC13, true_gamma=(0.5,), seed=5)
        data = simulate_panel(cfg)
        r1 = estimate_gmm(data, SPEC13)
        r2 = estimate_gmm(data, SPEC13)
        assert r1.gamma_hat == r2.gamma_hat

    def test_permutation_equivariance(self):
        cfg = SimConfig(N=800, spec=SPEC13, true_gamma=(0.5,), seed=6)
        data = simulate_panel(cfg)
        perm = np.random.default_rng(0).permutation(800)
        shuffled = type(data)(init=data.init[perm], x_index=data.x_index[perm],
                              y=data.y[perm])
        assert estimate_gmm(data, SPEC13).gamma_hat == estimate_gmm(shuffled, SPEC13).gamma_hat

    def test_unidentified_T2_rejected(self):
        spec = ModelSpec(1, 2, (0,))
        cfg = SimConfig(N=100, spec=spec, true_gamma=(0.5,), seed=1)
        with pytest.raises(UnidentifiedModelError):
            estimate_gmm(simulate_panel(cfg), spec)

    def test_mixed_inits_supported(self):
        cfg = SimConfig(N=2000, spec=SPEC13, true_gamma=(0.5,),
                        init_scheme=("random_bernoulli", 0.5), seed=8)
        result = estimate_gmm(simulate_panel(cfg), SPEC13)
        assert abs(result.gamma_hat[0] - 0.5) < 0.3


class TestMonteCarlo:
    def test_small_run_summary_fields(self):
        cfg = SimConfig(N=1, spec=SPEC13, true_gamma=(0.5,), seed=3)
        summaries = monte_carlo(cfg, reps=5, n_values=(300,))
        (s,) = summaries
        assert s.reps == 5 and s.failures == 0 and s.rmse >= abs(s.mean_bias)

    def test_reps_minimum(self):
        cfg = SimConfig(N=1, spec=SPEC13, true_gamma=(0.5,), seed=3)
        with pytest.raises(ValueError):
            monte_carlo(cfg, reps=1)
