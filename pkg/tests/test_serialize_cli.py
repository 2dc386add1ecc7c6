import json
import random

import pytest

from flbreuil import serialize as SER
from flbreuil.cli import main
from flbreuil.errors import PrecisionMismatch, SchemaMismatch
from flbreuil.fl import random_fl
from flbreuil.functors import fl_to_breuil
from flbreuil.kisin import random_gls


def test_fl_round_trip(amb3):
    M = random_fl(amb3, random.Random(0), 2)
    doc = SER.to_json(M)
    M2 = SER.from_json(json.loads(json.dumps(doc)))
    assert M2.jumps == M.jumps
    assert M2.Ftil.eq_at(M.Ftil, amb3.cap)
    assert SER.dumps(M2) == SER.dumps(M)


def test_kisin_round_trip(amb3):
    K = random_gls(amb3, random.Random(1), 2)
    K2 = SER.loads(SER.dumps(K))
    assert K2.A.eq_at(K.A, amb3.cap)
    assert K2.gls is not None
    assert K2.gls[1] == K.gls[1]


def test_breuil_round_trip_preserves_missing_monodromy(amb3):
    from flbreuil.kisin import kisin_to_breuil

    B = kisin_to_breuil(random_gls(amb3, random.Random(2), 2))
    B2 = SER.loads(SER.dumps(B))
    assert B2.Nmat is None
    assert B2.Phi.eq_at(B.Phi, B.Phi.entries[0][0].prec)

    Bn = fl_to_breuil(random_fl(amb3, random.Random(3), 2))
    Bn2 = SER.loads(SER.dumps(Bn))
    assert Bn2.Nmat is not None and Bn2.Nmat.is_zero_at(amb3.cap)


def test_unknown_fields_rejected(amb3):
    doc = SER.to_json(random_fl(amb3, random.Random(4), 1))
    doc["data"]["extra"] = 1
    with pytest.raises(SchemaMismatch):
        SER.from_json(doc)


def test_missing_field_rejected(amb3):
    doc = SER.to_json(random_fl(amb3, random.Random(5), 1))
    del doc["data"]["jumps"]
    with pytest.raises(SchemaMismatch):
        SER.from_json(doc)


def test_schema_tag_required(amb3):
    doc = SER.to_json(random_fl(amb3, random.Random(6), 1))
    doc["schema"] = "flbreuil/0"
    with pytest.raises(SchemaMismatch):
        SER.from_json(doc)


def test_p_two_rejected(amb3):
    doc = SER.to_json(random_fl(amb3, random.Random(7), 1))
    doc["params"]["p"] = 2
    with pytest.raises(SchemaMismatch, match="p > 2"):
        SER.from_json(doc)


def test_precision_mismatch_rejected(amb3):
    doc = SER.to_json(random_fl(amb3, random.Random(8), 1))
    doc["data"]["Ftil"]["entries"][0][0]["prec"] = amb3.cap + 5
    with pytest.raises(PrecisionMismatch):
        SER.from_json(doc)


def test_dumps_deterministic(amb3):
    M = random_fl(amb3, random.Random(9), 2)
    assert SER.dumps(M) == SER.dumps(M)


def test_round_trip_with_residue_degree_two(amb9):
    M = random_fl(amb9, random.Random(10), 2)
    M2 = SER.loads(SER.dumps(M))
    assert M2.amb.ring.m == amb9.ring.m
    # the reconstructed ring must carry the same Frobenius
    t = amb9.ring.make([0, 1])
    t2 = M2.amb.ring.make([0, 1])
    assert t.frobenius().coeffs == t2.frobenius().coeffs
    assert M2.Ftil.eq_at(
        SER.matrix_from_json(M2.amb, "witt", SER.matrix_to_json(M.Ftil)), amb9.cap
    )


# --- command line ---

def test_cli_gen_apply_section_roundtrip(tmp_path):
    m = tmp_path / "m.json"
    b = tmp_path / "b.json"
    s = tmp_path / "s.json"
    m2 = tmp_path / "m2.json"
    assert main(["gen", "fl", "--d", "2", "--jumps", "0,2", "--r", "2",
                 "--seed", "7", "--out", str(m)]) == 0
    assert main(["apply", "mls", "--in", str(m), "--out", str(b)]) == 0
    assert main(["section", "--in", str(b), "--out", str(s)]) == 0
    sec = json.loads(s.read_text())
    assert sec["data"]["iterations"] == 0 and sec["data"]["exact"]
    assert main(["apply", "mfl", "--in", str(b), "--out", str(m2)]) == 0
    a = SER.load(str(m))
    c = SER.load(str(m2))
    assert a.jumps == c.jumps
    assert a.Ftil.eq_at(c.Ftil, a.amb.N_p)


def test_cli_gen_deterministic(tmp_path):
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    args = ["gen", "kisin-gls", "--d", "2", "--r", "2", "--seed", "3"]
    assert main(args + ["--out", str(p1)]) == 0
    assert main(args + ["--out", str(p2)]) == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_cli_verify_and_report(tmp_path):
    rep = tmp_path / "rep.jsonl"
    code = main(["verify", "--suite", "ring-laws", "--suite", "unipotence",
                 "--seeds", "1..2", "--r", "2", "--out", str(rep)])
    assert code == 0
    lines = [json.loads(l) for l in rep.read_text().splitlines()]
    assert all(l["ok"] for l in lines)
    assert {l["suite"] for l in lines} == {"ring-laws", "unipotence"}
    assert main(["report", "--in", str(rep)]) == 0


def test_cli_verify_report_reproducible(tmp_path):
    r1, r2 = tmp_path / "r1.jsonl", tmp_path / "r2.jsonl"
    args = ["verify", "--suite", "easylemma", "--seeds", "1..3", "--r", "2"]
    assert main(args + ["--out", str(r1)]) == 0
    assert main(args + ["--out", str(r2)]) == 0
    assert r1.read_bytes() == r2.read_bytes()


def test_cli_usage_errors(tmp_path):
    assert main(["gen", "nonsense"]) == 2
    assert main(["apply", "mls", "--in", str(tmp_path / "missing.json")]) == 2
    assert main(["verify", "--suite", "ring-laws", "--seeds", "1", "--p", "2"]) == 2


def test_cli_roundtrip_verb(tmp_path):
    out = tmp_path / "rt.jsonl"
    assert main(["roundtrip", "--direction", "fl", "--seeds", "1..3",
                 "--r", "1", "--out", str(out)]) == 0
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(lines) == 3 and all(l["ok"] for l in lines)
