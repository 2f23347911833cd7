import numpy as np
import pytest

from hybsat.bench import (COEF_PER_OCCURRENCE, COEF_PER_VARIABLE, FAMILIES,
                          FAMILY_CARDS, FAMILY_CNF_XOR, FAMILY_PBS,
                          FAMILY_XOR_CARD, GenSpec, benchmark_grid,
                          generate_batch, generate_instance, instance_name)
from hybsat.formula import Kind, WeightMap, check_formula, to_hbf


def spec_for(family, **kw):
    base = dict(n=50, seed=3, count=1)
    if family == FAMILY_CNF_XOR:
        base.update(r_c=2.0, r_x=0.2)
    elif family == FAMILY_XOR_CARD:
        base.update(r_x=0.2, delta=0.3)
    else:
        base.update(r_p=0.5, r_v=0.3)
    base.update(kw)
    return GenSpec(family=family, **base)


class TestSpecValidation:
    def test_family_checked(self):
        with pytest.raises(ValueError):
            GenSpec(family="mixed", n=10)

    def test_family_parameters_checked(self):
        with pytest.raises(ValueError, match="delta"):
            GenSpec(family=FAMILY_XOR_CARD, n=10, r_x=0.2, delta=0.0)
        with pytest.raises(ValueError, match="r_v"):
            GenSpec(family=FAMILY_CARDS, n=10, r_p=0.5, r_v=1.0)
        with pytest.raises(ValueError, match="clause_width"):
            GenSpec(family=FAMILY_CNF_XOR, n=2, r_c=1.0, clause_width=3)
        with pytest.raises(ValueError, match="coef_mode"):
            GenSpec(family=FAMILY_PBS, n=10, r_p=0.5, r_v=0.3,
                    coef_mode="random")


class TestCounts:
    def test_cnf_xor_counts(self):
        f = generate_instance(spec_for(FAMILY_CNF_XOR, r_c=2.0, r_x=0.2)).formula
        kinds = [c.kind for c in f.constraints]
        assert kinds.count(Kind.CLAUSE) == 100
        assert kinds.count(Kind.XOR) == 10
        assert all(c.length == 3 for c in f.constraints
                   if c.kind is Kind.CLAUSE)

    def test_fractional_counts_floored(self):
        # 0.7 * 50 is 34.999... in floats and must still count as 35
        f = generate_instance(spec_for(FAMILY_CARDS, r_p=0.7, r_v=0.2)).formula
        assert f.m == 35

    def test_xor_card_structure(self):
        f = generate_instance(spec_for(FAMILY_XOR_CARD, r_x=0.2, delta=0.3)).formula
        cards = [c for c in f.constraints if c.kind is Kind.CARD]
        assert len(cards) == 1
        card = cards[0]
        assert card.comparator == "<="
        assert card.threshold == 15
        assert card.length == 50
        assert all(not lit.negated for lit in card.literals)
        assert sum(c.kind is Kind.XOR for c in f.constraints) == 10

    def test_cards_structure(self):
        f = generate_instance(spec_for(FAMILY_CARDS, r_p=0.5, r_v=0.4)).formula
        assert f.m == 25
        for c in f.constraints:
            assert c.kind is Kind.CARD
            assert c.length == 20
            assert c.threshold == 10
            assert c.comparator in ("<=", ">=")
            assert all(not lit.negated for lit in c.literals)

    def test_pbs_structure(self):
        f = generate_instance(spec_for(FAMILY_PBS)).formula
        for c in f.constraints:
            assert c.kind is Kind.PB
            assert c.length == 15
            assert all(1 <= coef <= 50 for coef in c.coefficients)
            assert c.threshold == sum(c.coefficients) // 2


class TestCoefficientModes:
    def test_per_variable_mode_is_consistent(self):
        f = generate_instance(spec_for(FAMILY_PBS,
                                       coef_mode=COEF_PER_VARIABLE)).formula
        seen = {}
        for c in f.constraints:
            for lit, coef in zip(c.literals, c.coefficients):
                assert seen.setdefault(lit.var, coef) == coef

    def test_per_occurrence_mode_varies(self):
        f = generate_instance(spec_for(FAMILY_PBS, n=20, r_p=0.7, r_v=0.5,
                                       coef_mode=COEF_PER_OCCURRENCE)).formula
        seen = {}
        conflicts = 0
        for c in f.constraints:
            for lit, coef in zip(c.literals, c.coefficients):
                if seen.setdefault(lit.var, coef) != coef:
                    conflicts += 1
        assert conflicts > 0


class TestPlanting:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_hidden_assignment_satisfies(self, family):
        for index in range(5):
            inst = generate_instance(spec_for(family, plant=True, count=5), index)
            assert inst.hidden is not None
            _, unsat = check_formula(inst.formula, inst.hidden,
                                     WeightMap.uniform(inst.formula.m))
            assert unsat == []

    def test_unplanted_has_no_hidden(self):
        inst = generate_instance(spec_for(FAMILY_CARDS))
        assert inst.hidden is None

    def test_xor_card_plant_hits_threshold_exactly(self):
        spec = spec_for(FAMILY_XOR_CARD, plant=True, delta=0.4)
        inst = generate_instance(spec)
        assert int((inst.hidden == -1).sum()) == 20

    def test_planted_xor_parity_via_first_literal(self):
        # the only negations in a planted xor_card instance are the parity fixes
        spec = spec_for(FAMILY_XOR_CARD, plant=True)
        inst = generate_instance(spec)
        for c in inst.formula.constraints:
            if c.kind is Kind.XOR:
                assert all(not lit.negated for lit in c.literals[1:])


class TestDistributions:
    def test_xor_lengths_concentrate_at_half(self):
        # each variable joins an XOR with probability 1/2
        spec = spec_for(FAMILY_XOR_CARD, r_x=0.4, count=10)
        lengths = []
        for inst in generate_batch(spec):
            lengths += [c.length for c in inst.formula.constraints
                        if c.kind is Kind.XOR]
        mean = np.mean(lengths)
        sigma = np.sqrt(50 * 0.25 / len(lengths))
        assert abs(mean - 25.0) < 4 * sigma

    def test_clause_variables_distinct(self):
        f = generate_instance(spec_for(FAMILY_CNF_XOR, r_c=4.0)).formula
        for c in f.constraints:
            assert len(set(c.variables)) == c.length


class TestDeterminism:
    def test_batch_reproducible(self):
        spec = spec_for(FAMILY_PBS, plant=True, count=3)
        a = [to_hbf(inst.formula) for inst in generate_batch(spec)]
        b = [to_hbf(inst.formula) for inst in generate_batch(spec)]
        assert a == b

    def test_index_isolated(self):
        # instance k does not depend on how many instances precede it
        spec = spec_for(FAMILY_CARDS, count=4)
        whole = generate_batch(spec)
        assert to_hbf(generate_instance(spec, 3).formula) == \
            to_hbf(whole[3].formula)

    def test_seeds_differ(self):
        f1 = generate_instance(spec_for(FAMILY_CARDS, seed=1)).formula
        f2 = generate_instance(spec_for(FAMILY_CARDS, seed=2)).formula
        assert to_hbf(f1) != to_hbf(f2)


class TestNaming:
    def test_names_enumerate_parameters(self):
        name = instance_name(spec_for(FAMILY_XOR_CARD, plant=True), 7)
        assert name == "xor_card_n50_rx0.2_d0.3_planted_007.hbf"
        name = instance_name(spec_for(FAMILY_PBS, coef_mode=COEF_PER_VARIABLE), 0)
        assert name == "pbs_n50_rp0.5_rv0.3_t2_000.hbf"


class TestGrids:
    def test_grid_sizes_match_instance_budget(self):
        # 10 instances per spec: 360 + 270 + 360 + 720 overall
        sizes = {family: sum(s.count for s in benchmark_grid(family))
                 for family in FAMILIES}
        assert sizes == {FAMILY_CNF_XOR: 360, FAMILY_XOR_CARD: 270,
                         FAMILY_CARDS: 360, FAMILY_PBS: 720}

    def test_grid_specs_generate(self):
        for family in FAMILIES:
            spec = benchmark_grid(family, seed=5)[0]
            small = GenSpec(family=spec.family, n=spec.n, r_c=spec.r_c,
                            r_x=spec.r_x, r_p=spec.r_p, delta=spec.delta,
                            r_v=spec.r_v, clause_width=spec.clause_width,
                            coef_mode=spec.coef_mode, count=1, seed=5)
            assert generate_instance(small).formula.m > 0

    def test_unknown_family_rejected(self):
        with pytest.raises(ValueError):
            benchmark_grid("mixed")
