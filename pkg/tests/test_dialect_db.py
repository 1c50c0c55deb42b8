import json

import pytest

from plport.dialect_db import DialectVersion, load_catalog, seed_catalog
from plport.errors import DuplicateId, SchemaError
from plport.shims import SHIMS


def record(id_, name, arity, sics, swi, **extra):
    d = {"id": id_, "kind": "predicate", "name": name, "arity": arity, "status": {"sicstus4": sics, "swi8": swi}}
    d.update(extra)
    return d


def write_ext(tmp_path, records, name="ext.json"):
    p = tmp_path / name
    p.write_text(json.dumps({"records": records}))
    return p


class TestSeed:
    def test_prefix_argument_order(self, db):
        r = db.lookup_predicate("prefix", 2, "lists")
        assert r.status["swi8"].permutation == (2, 1)
        assert r.status["sicstus4"].state == "behavior_differs"

    def test_copy_term_attributes(self, db):
        r = db.lookup_predicate("copy_term", 2)
        assert r.state("sicstus4") == "behavior_differs"
        assert r.state("swi8") == "supported"

    def test_exists_source_emulatable_on_sicstus(self, db):
        r = db.lookup_predicate("exists_source", 1)
        assert r.state("sicstus4") == "emulatable"
        assert r.status["sicstus4"].shim in SHIMS

    def test_module_fallback_to_builtin(self, db):
        assert db.lookup_predicate("copy_term", 2, "whatever") is db.lookup_predicate("copy_term", 2)

    def test_arith_functions(self, db):
        assert db.lookup_arith_function("cot", 1, "swi8") == "supported"
        assert db.lookup_arith_function("cot", 1, "sicstus4") == "absent"
        assert db.lookup_arith_function("no_such_fn", 1, "swi8") is None

    def test_libraries(self, db):
        assert db.lookup_library("avl").state("swi8") == "absent"
        assert db.lookup_library("lists").state("swi8") == "supported"
        assert db.lookup_library("nope") is None

    def test_negative_arity(self, db):
        with pytest.raises(ValueError):
            db.lookup_predicate("p", -1)

    def test_every_emulatable_names_known_shim(self, db):
        for r in db.records.values():
            for st in r.status.values():
                if st.state == "emulatable":
                    assert st.shim in SHIMS

    def test_document_round_trip(self, db, tmp_path):
        p = tmp_path / "all.json"
        p.write_text(json.dumps(db.to_document()))
        from plport.dialect_db import Catalog

        again = Catalog().load_extension(p)
        assert again.to_document() == db.to_document()


class TestExtensions:
    def test_empty_extension_is_identity(self, tmp_path):
        cat = load_catalog([write_ext(tmp_path, [])])
        assert cat.to_document() == seed_catalog().to_document()

    def test_last_wins(self, tmp_path):
        a = write_ext(tmp_path, [record("x/0", "x", 0, {"state": "supported"}, {"state": "absent"})], "a.json")
        b = write_ext(tmp_path, [record("x/0", "x", 0, {"state": "absent"}, {"state": "supported"})], "b.json")
        cat = load_catalog([a, b])
        assert cat.lookup_predicate("x", 0).state("swi8") == "supported"
        assert load_catalog([b, a]).lookup_predicate("x", 0).state("swi8") == "absent"

    def test_override_seed_record(self, tmp_path):
        p = write_ext(tmp_path, [record("copy_term/2", "copy_term", 2, {"state": "supported"}, {"state": "supported"})])
        assert load_catalog([p]).lookup_predicate("copy_term", 2).state("sicstus4") == "supported"
        assert seed_catalog().lookup_predicate("copy_term", 2).state("sicstus4") == "behavior_differs"

    def test_unknown_dialect(self, tmp_path):
        rec = record("x/0", "x", 0, {"state": "supported"}, {"state": "supported"})
        rec["status"]["yap"] = {"state": "supported"}
        with pytest.raises(SchemaError) as exc:
            load_catalog([write_ext(tmp_path, [rec])])
        assert "yap" in str(exc.value)

    def test_missing_dialect(self, tmp_path):
        rec = record("x/0", "x", 0, {"state": "supported"}, {"state": "supported"})
        del rec["status"]["swi8"]
        with pytest.raises(SchemaError):
            load_catalog([write_ext(tmp_path, [rec])])

    def test_duplicate_id(self, tmp_path):
        rec = record("x/0", "x", 0, {"state": "supported"}, {"state": "supported"})
        with pytest.raises(DuplicateId):
            load_catalog([write_ext(tmp_path, [rec, rec])])

    def test_bad_state(self, tmp_path):
        with pytest.raises(SchemaError):
            load_catalog([write_ext(tmp_path, [record("x/0", "x", 0, {"state": "maybe"}, {"state": "supported"})])])

    def test_unknown_shim_rejected(self, tmp_path):
        rec = record("x/0", "x", 0, {"state": "supported"}, {"state": "emulatable", "shim": "no_such_shim"})
        with pytest.raises(SchemaError):
            load_catalog([write_ext(tmp_path, [rec])])

    def test_name_differs_needs_replacement(self, tmp_path):
        rec = record("x/0", "x", 0, {"state": "supported"}, {"state": "name_differs"})
        with pytest.raises(SchemaError):
            load_catalog([write_ext(tmp_path, [rec])])

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{nope")
        with pytest.raises(SchemaError):
            load_catalog([p])


class TestVersions:
    def test_parse(self):
        v = DialectVersion.parse("swi8@9.1")
        assert v.dialect == "swi8" and v.components() == (9, 1, 0)

    def test_order(self):
        assert DialectVersion.parse("swi8@8.4.0") < DialectVersion.parse("swi8@9.0.0")

    def test_alias(self):
        assert DialectVersion.parse("swi").dialect == "swi8"
