"""Smoke test for the semicausal_py extension."""

import json
from fractions import Fraction

import semicausal_py as sc


def main():
    u = sc.Semimeasure.uniform(2, 2)
    assert u.total() == "1/1"
    trace = json.loads(u.grow())
    assert trace["branch"] == "00"
    assert trace["load_nodes"] == ["01"]
    assert [leaf["after"] for leaf in trace["leaves"]] == ["1/8", "1/4", "1/8", "1/8"]
    assert u.amplification_holds()

    p = sc.BivariateSemimeasure.random(3, 3, positive=True, total="7/8")
    assert p.factorization_identity()
    terms = p.decomposition([0, 1, 1], [1, 0, 1])
    assert abs(terms[0] - sum(terms[1:])) < 1e-9
    s = p.shannon_sit()
    assert abs(s["SI"] - s["SIT_xy"] - s["SIT_yx"] - s["SIT_inst"]) < 1e-9
    assert len(set(p.equivalence().values())) == 1

    pair = sc.simulate("lag1-copy", n=2000, seed=1, coupling="0.9")
    assert len(pair) == 2000
    assert pair.sit(1, "y_from_x") > 0.3
    assert pair.sit_p_value(trials=50, seed=1) < 0.05
    tests = pair.influence_tests()
    assert tests["strict_influence"] > 100
    assert pair.granger(1) >= 0.0

    p0 = sc.Semimeasure.random(1, 2)
    pa = sc.Semimeasure.random(2, 2)
    assert sc.roc_dominance(p0, pa)
    assert sc.sampler_tv(["1/10", "1/5", "3/10", "2/5"], 20000, 3) < 0.02
    assert 0 < Fraction(sc.markov_mixture("markov:k=0,g=2", 2).total()) <= 1
    assert sc.selftest(2, 5, 0)

    try:
        sc.Semimeasure(1, 2, ["3/4", "1/2"])
    except sc.SemicausalError as e:
        assert "mass_above_one" in str(e)
    else:
        raise AssertionError("expected SemicausalError")

    print("smoke test ok")


if __name__ == "__main__":
    main()
