import json

import pytest

from eqformal import catalog as cat
from eqformal.cartanmodel import YES

ROUTES_RANK_4 = {"torus-quotient": 14, "equal-rank": 38, "product-reduction": 9, "shared-torus-transfer": 21,
                 "kernel-dimension": 33, "nested-ideal": 4, "free-cohomology": 6}


@pytest.fixture(scope="module")
def entries():
    return cat.load_catalog()


@pytest.fixture(scope="module")
def small_report(entries):
    return cat.run_catalog(entries, cat.Bounds(max_rank=4))


def write_catalog(tmp_path, families):
    p = tmp_path / "catalog.json"
    p.write_text(json.dumps({"format": "eqformal-catalog", "version": 1, "families": families}))
    return p


FAMILY = {"id": "f", "family": "SU(n)/SO(n)", "group": "SU({n})", "subgroup": "SO({n})", "tag": "symmetric",
          "expected_routes": ["kernel-dimension"], "params": ["n"], "rank": "n - 1", "minimum": 3,
          "embedding": [{"kind": "real-in-complex"}]}


def test_instance_count(entries):
    insts = [i for e in entries for i in cat.generate_instances(e)]
    assert len(insts) == 624
    # SU(2n)/U(n) appears in two families with different embeddings
    assert len({(i.family, i.label) for i in insts}) == len(insts)
    assert len({i.label for i in insts}) == len(insts) - 4


def test_instances_are_lexicographic(tmp_path):
    fam = dict(FAMILY, params=["a", "b"], rank="a + b", minimum=1, group="SU({a + b + 1})",
               subgroup="S(U({a})U({b})U(1))", embedding=[{"kind": "block"}], tag="equal-rank",
               constraints=["a >= b"])
    (e,) = cat.load_catalog(write_catalog(tmp_path, [fam]))
    got = [tuple(i.params.values()) for i in cat.generate_instances(e, max_rank=4)]
    assert got == [(1, 1), (2, 1), (2, 2), (3, 1)]


def test_rank_bound_filters_instances(tmp_path):
    (e,) = cat.load_catalog(write_catalog(tmp_path, [FAMILY]))
    assert [i.label for i in cat.generate_instances(e, max_rank=3)] == ["SU(3)/SO(3)", "SU(4)/SO(4)"]


def test_cases_override_fields(tmp_path):
    fam = dict(FAMILY, cases=[{"when": "n == 4", "expected_routes": ["free-cohomology"], "note": "four"}])
    (e,) = cat.load_catalog(write_catalog(tmp_path, [fam]))
    a, b = cat.generate_instances(e, max_rank=3)
    assert a.expected_routes == ["kernel-dimension"] and b.expected_routes == ["free-cohomology"]
    assert b.note == "four"


@pytest.mark.parametrize("bad,msg", [
    (dict(FAMILY, tag="bogus"), "unknown tag"),
    (dict(FAMILY, colour="red"), "unknown fields"),
    ({k: v for k, v in FAMILY.items() if k != "rank"}, "params and a rank"),
    (dict(FAMILY, cases=[{"tag": "direct"}]), "'when'"),
    ({k: v for k, v in FAMILY.items() if k != "group"}, "missing"),
])
def test_invalid_families(tmp_path, bad, msg):
    with pytest.raises(cat.CatalogError, match=msg):
        cat.load_catalog(write_catalog(tmp_path, [bad]))


def test_duplicate_ids(tmp_path):
    with pytest.raises(cat.CatalogError, match="duplicate"):
        cat.load_catalog(write_catalog(tmp_path, [FAMILY, FAMILY]))


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(cat.CatalogError, match="not found"):
        cat.load_catalog(tmp_path / "nope.json")
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(cat.CatalogError, match="not valid JSON"):
        cat.load_catalog(p)


def test_catalog_path_from_environment(tmp_path, monkeypatch):
    p = write_catalog(tmp_path, [FAMILY])
    monkeypatch.setenv(cat.CATALOG_ENV, str(p))
    assert [e.id for e in cat.load_catalog()] == ["f"]


@pytest.mark.parametrize("expr", ["__import__('os')", "n.real", "n ** 2", "[n]", "(lambda: 1)()", "open"])
def test_evaluator_rejects_anything_but_arithmetic(expr):
    with pytest.raises(cat.CatalogError):
        cat.evaluate(expr, {"n": 3})


def test_evaluator_arithmetic():
    assert cat.evaluate("2 * n - 1", {"n": 4}) == 7
    assert cat.evaluate("n % 2 == 0 and not n < 2", {"n": 4}) is True
    assert cat.render({"a": ["SO({2 * n})"]}, {"n": 3}) == {"a": ["SO(6)"]}


def test_empty_catalog_gives_empty_report():
    r = cat.run_catalog([])
    assert r.results == [] and r.all_yes and not r.inconclusive
    assert r.counts["instances"] == 0
    assert r.to_dict()["total_timing_ms"] == 0


def test_small_catalog_golden_routes(small_report):
    c = small_report.counts
    assert c["instances"] == 125
    assert c["all_yes"] == 125 and c["route_mismatches"] == 0
    assert c["by_route"] == ROUTES_RANK_4
    assert small_report.failures == []


def test_report_json_round_trip(small_report):
    text = small_report.to_json()
    again = cat.Report.from_json(text).to_json()
    assert again == text
    with pytest.raises(cat.CatalogError):
        cat.Report.from_dict({"format": "other"})


def test_report_is_deterministic_without_timing(entries, small_report):
    again = cat.run_catalog(entries, cat.Bounds(max_rank=4))
    assert again.to_json(include_timing=False) == small_report.to_json(include_timing=False)
    assert "timing_ms" not in again.to_json(include_timing=False)


def test_report_table(small_report):
    table = small_report.to_table()
    assert "125 instances, 125 yes/yes" in table
    assert cat.SCOPE_NOTE in table


def test_transfer_records_links_and_direct_check(entries):
    inst = cat.find_instance(entries, "SU(4)/Sp(1)xSp(1)")
    r = cat.run_instance(inst)
    v = r["verdict"]
    assert v.route == "shared-torus-transfer" and v.all_yes
    assert all(link["weyl_element"] is not None for link in v.witness["links"])
    assert v.witness["direct"]["route"] is not None
    assert "direct check agrees with the transfer" in v.notes


def test_transfer_without_consistency_check(entries):
    inst = cat.find_instance(entries, "SU(4)/Sp(1)xSp(1)")
    v = cat.run_instance(inst, cat.Bounds(consistency=False))["verdict"]
    assert v.all_yes and "direct" not in v.witness


def test_product_reduction(entries):
    inst = cat.find_instance(entries, "SU(2)xSU(2)/SU(2)")
    v = cat.run_instance(inst)["verdict"]
    assert v.route == "product-reduction" and v.poincare == [1, 0, 0, 1]


def test_primitive_checks(entries):
    kinds = [c.kind for c in cat.reduce_entry(cat.find_instance(entries, "SU(4)/Sp(1)xSp(1)"))]
    assert kinds[-2:] == ["space", "space"]
    assert {"weyl-link", "declared"} & set(kinds)
    (t,) = cat.reduce_entry(cat.find_instance(entries, "T^1/T^0"))
    assert t.kind == "torus"


def test_errors_become_report_content():
    inst = cat.CatalogInstance("x", {}, "SU(3)", "SO(5)", "direct", ["kernel-dimension"],
                               embedding=[{"kind": "block"}])
    r = cat.run_instance(inst)
    assert r["verdict"].formal == "error" and not r["route_matches"]
    assert "dimension" in r["verdict"].notes[0]


def test_find_instance_missing(entries):
    assert cat.find_instance(entries, "SU(3)/Nothing") is None


def test_oracle_attached_when_requested(entries):
    inst = cat.find_instance(entries, "SO(8)/SO(4)")
    v = cat.run_instance(inst, cat.Bounds(oracle=True))["verdict"]
    assert v.oracle == {"d_squared_zero": True, "cohomology_matches": True, "fiber_surjective": True}
    v = cat.run_instance(inst, cat.Bounds(oracle=True, oracle_max_dimension=10))["verdict"]
    assert "skipped" in v.oracle
    assert v.all_yes and v.formal == YES
