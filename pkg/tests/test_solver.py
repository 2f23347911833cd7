import numpy as np
import pytest

from hybsat.bench import (FAMILY_CARDS, FAMILY_CNF_XOR, GenSpec,
                          generate_instance)
from hybsat.formula import (Constraint, Formula, Kind, Literal, WeightMap,
                            check_formula, parse_wcnf)
from hybsat.solver import (MODE_MAXSAT, MODE_SAT, STATUS_SAT, STATUS_UNKNOWN,
                           SolverConfig, incomplete_score, init_weights,
                           reweight, round_randomized, round_sign,
                           solve_maxsat, solve_sat)

from oracles import maxsat_optimum


def lits(*signed):
    return tuple(Literal.from_signed(s) for s in signed)


def hard_formula(*clauses):
    cs = tuple(Constraint(kind=Kind.CLAUSE, literals=lits(*cl), id=i)
               for i, cl in enumerate(clauses))
    n = max(abs(s) for cl in clauses for s in cl)
    return Formula(n=n, constraints=cs)


class TestInitWeights:
    def test_sat_weights_are_lengths(self):
        f = Formula(n=5, constraints=(
            Constraint(kind=Kind.CLAUSE, literals=lits(1, 2, 3), id=0),
            Constraint(kind=Kind.XOR, literals=lits(1, 4, 5), id=1),
            Constraint(kind=Kind.CARD, literals=lits(1, 2, 3, 4, 5),
                       comparator=">=", threshold=2, id=2)))
        np.testing.assert_array_equal(init_weights(f, MODE_SAT).values, [3, 3, 5])

    def test_maxsat_hard_weight_exceeds_soft_total(self):
        f = parse_wcnf("p wcnf 3 6 100\n100 1 2 0\n100 3 0\n"
                       "1 -1 0\n1 -2 0\n1 -3 0\n1 1 3 0\n")
        w = init_weights(f, MODE_MAXSAT)
        np.testing.assert_array_equal(w.values, [5, 5, 1, 1, 1, 1])

    def test_maxsat_without_soft_rejected(self):
        f = hard_formula([1, 2])
        with pytest.raises(ValueError, match="soft"):
            init_weights(f, MODE_MAXSAT)


class TestReweight:
    def test_empty_violation_set_is_identity(self):
        w = WeightMap([1.0, 2.0])
        out = reweight(w, [], 2.0)
        np.testing.assert_array_equal(out.values, w.values)

    def test_multiplies_violated(self):
        out = reweight(WeightMap([1.0, 2.0, 3.0]), [0, 2], 2.0)
        np.testing.assert_array_equal(out.values, [2.0, 2.0, 6.0])

    def test_original_untouched(self):
        w = WeightMap([1.0, 2.0])
        reweight(w, [0], 3.0)
        np.testing.assert_array_equal(w.values, [1.0, 2.0])

    def test_renormalizes_at_cap(self):
        w = WeightMap([1e12, 1.0])
        out = reweight(w, [0], 2.0)
        np.testing.assert_allclose(out.values, [1.0, 0.5e-12])

    def test_below_cap_untouched(self):
        out = reweight(WeightMap([1e11, 1.0]), [0], 2.0)
        np.testing.assert_array_equal(out.values, [2e11, 1.0])

    def test_factor_validated(self):
        with pytest.raises(ValueError):
            reweight(WeightMap([1.0]), [0], 1.0)


class TestRounding:
    def test_endpoints_deterministic(self):
        rng = np.random.default_rng(0)
        a = np.array([-1.0, 1.0, -1.0])
        for _ in range(5):
            np.testing.assert_array_equal(round_randomized(a, rng), [-1, 1, -1])

    def test_randomized_frequency(self):
        # P[True] = (1 - a)/2: 0.5 at the center, 0.25 at a = 0.5
        rng = np.random.default_rng(1)
        trials = 20000
        a = np.array([0.0, 0.5])
        draws = np.stack([round_randomized(a, rng) for _ in range(trials)])
        freq_true = (draws == -1).mean(axis=0)
        assert abs(freq_true[0] - 0.5) < 3 * 0.5 / np.sqrt(trials)
        assert abs(freq_true[1] - 0.25) < 3 * 0.45 / np.sqrt(trials)

    def test_sign_rounding(self):
        rng = np.random.default_rng(2)
        np.testing.assert_array_equal(
            round_sign(np.array([-0.2, 0.9]), rng), [-1, 1])

    def test_sign_rounding_breaks_ties_randomly(self):
        rng = np.random.default_rng(3)
        outcomes = {int(round_sign(np.zeros(1), rng)[0]) for _ in range(64)}
        assert outcomes == {-1, 1}

    def test_dtype(self):
        rng = np.random.default_rng(4)
        assert round_randomized(np.zeros(3), rng).dtype == np.int8
        assert round_sign(np.zeros(3), rng).dtype == np.int8


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(weight_factor=1.0)
        with pytest.raises(ValueError):
            SolverConfig(trials_per_restart=0)
        with pytest.raises(ValueError):
            SolverConfig(mode="count")
        with pytest.raises(ValueError):
            SolverConfig(workers=0)

    def test_mode_checked_by_entry_points(self):
        f = hard_formula([1])
        with pytest.raises(ValueError):
            solve_sat(f, SolverConfig(mode=MODE_MAXSAT))
        with pytest.raises(ValueError):
            solve_maxsat(f, SolverConfig(mode=MODE_SAT))


class TestSolveSat:
    def test_single_clause(self):
        sol = solve_sat(hard_formula([1, 2]), SolverConfig(seed=5))
        assert sol.status == STATUS_SAT
        sat, unsat = check_formula(hard_formula([1, 2]), sol.assignment,
                                   WeightMap([1.0]))
        assert not unsat

    def test_contradiction_reports_unknown(self):
        f = hard_formula([1], [-1])
        sol = solve_sat(f, SolverConfig(seed=6, restarts=3))
        assert sol.status == STATUS_UNKNOWN
        # one of the two unit clauses is always satisfied
        assert sol.best_objective == pytest.approx(1.0)
        assert sol.assignment is not None
        assert sol.trials_used == 3 * 8

    def test_planted_mixed_instance(self):
        spec = GenSpec(family=FAMILY_CNF_XOR, n=30, r_c=2.0, r_x=0.2,
                       seed=9, plant=True, count=1)
        inst = generate_instance(spec)
        sol = solve_sat(inst.formula, SolverConfig(seed=10))
        assert sol.status == STATUS_SAT
        w = init_weights(inst.formula, MODE_SAT)
        assert check_formula(inst.formula, sol.assignment, w)[1] == []

    def test_deterministic_for_fixed_seed(self):
        spec = GenSpec(family=FAMILY_CARDS, n=20, r_p=0.5, r_v=0.3,
                       seed=11, plant=True, count=1)
        f = generate_instance(spec).formula
        a = solve_sat(f, SolverConfig(seed=12))
        b = solve_sat(f, SolverConfig(seed=12))
        assert a.status == b.status
        np.testing.assert_array_equal(a.assignment, b.assignment)
        assert (a.trials_used, a.restarts_used, a.gradient_calls) == \
            (b.trials_used, b.restarts_used, b.gradient_calls)
        assert a.trial_log == b.trial_log

    def test_timeout_zero_returns_immediately(self):
        f = hard_formula([1, 2], [-1, -2])
        sol = solve_sat(f, SolverConfig(seed=13, timeout=0.0))
        assert sol.status == STATUS_UNKNOWN
        assert sol.trials_used == 0

    def test_trial_log_records_restart_structure(self):
        f = hard_formula([1], [-1])
        hooks = []
        sol = solve_sat(f, SolverConfig(seed=14, restarts=2),
                        on_trial=hooks.append)
        assert hooks == sol.trial_log
        # a fresh restart re-ascends from a random point, later trials
        # continue from the previous local optimum
        for rec in sol.trial_log:
            want = "x0" if rec["trial"] == 0 else "x_star"
            assert rec["start"] == want
            assert rec["sign_rounding_violations"] == 1

    def test_parallel_workers_solve(self):
        spec = GenSpec(family=FAMILY_CARDS, n=20, r_p=0.5, r_v=0.3,
                       seed=15, plant=True, count=1)
        f = generate_instance(spec).formula
        sol = solve_sat(f, SolverConfig(seed=16, workers=2))
        assert sol.status == STATUS_SAT
        w = init_weights(f, MODE_SAT)
        assert check_formula(f, sol.assignment, w)[1] == []


class TestSolveMaxsat:
    def test_two_unit_conflict_costs_one(self):
        f = parse_wcnf("p wcnf 1 2\n1 1 0\n1 -1 0\n")
        sol = solve_maxsat(f, SolverConfig(seed=17, mode=MODE_MAXSAT, restarts=2))
        assert sol.status == STATUS_SAT
        assert sol.best_cost == 1.0

    def test_infeasible_hard_part(self):
        f = parse_wcnf("p wcnf 1 3 10\n10 1 0\n10 -1 0\n1 1 0\n")
        sol = solve_maxsat(f, SolverConfig(seed=18, mode=MODE_MAXSAT, restarts=2))
        assert sol.status == STATUS_UNKNOWN
        assert sol.best_cost == np.inf

    def test_matches_exhaustive_optimum(self):
        rng = np.random.default_rng(19)
        for _ in range(5):
            n = int(rng.integers(4, 9))
            m = int(rng.integers(4, 10))
            clauses = []
            for _ in range(m):
                k = int(rng.integers(1, 4))
                vars_ = rng.choice(n, size=k, replace=False) + 1
                signs = rng.integers(0, 2, k) * 2 - 1
                clauses.append([int(v * s) for v, s in zip(vars_, signs)])
            text = f"p wcnf {n} {m}\n" + "".join(
                f"{rng.integers(1, 4)} {' '.join(map(str, cl))} 0\n"
                for cl in clauses)
            f = parse_wcnf(text)
            sol = solve_maxsat(f, SolverConfig(seed=20, mode=MODE_MAXSAT,
                                               restarts=10))
            assert sol.best_cost == pytest.approx(maxsat_optimum(f))

    def test_cost_lower_bounded_by_baselines(self):
        f = parse_wcnf("p wcnf 2 3\n3 1 0\n2 -1 0\n1 2 0\n")
        hooks = []
        sol = solve_maxsat(f, SolverConfig(seed=21, mode=MODE_MAXSAT, restarts=2),
                           on_best=hooks.append)
        # reported improvements are strictly decreasing and end at the answer
        assert hooks == sorted(hooks, reverse=True)
        assert hooks[-1] == sol.best_cost
        assert sol.best_cost <= 2.0  # all-True baseline cost

    def test_assignment_respects_hard_constraints(self):
        f = parse_wcnf("p wcnf 3 4 50\n50 1 0\n50 2 0\n1 -1 0\n1 -2 -3 0\n")
        sol = solve_maxsat(f, SolverConfig(seed=22, mode=MODE_MAXSAT, restarts=5))
        assert sol.status == STATUS_SAT
        b = sol.assignment
        assert b[0] == -1 and b[1] == -1
        assert sol.best_cost == pytest.approx(1.0)


class TestIncompleteScore:
    def test_reference_values(self):
        assert incomplete_score(4.0, 4.0) == 1.0
        assert incomplete_score(19.0, 9.0) == 0.5
        assert incomplete_score(0.0, 0.0) == 1.0

    def test_infeasible_scores_zero(self):
        assert incomplete_score(np.inf, 3.0) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            incomplete_score(-1.0, 0.0)
