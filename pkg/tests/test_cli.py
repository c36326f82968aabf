import json

import jsonschema
import numpy as np

from opclass import cli, registry
from opclass.schemas import REPORT_SCHEMA


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    return doc


def verdicts(doc):
    return {v["class_name"]: v["holds"] for v in doc["verdicts"]}


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


# -- shift analyze ------------------------------------------------------------------


def test_shift_two_weight_prefix(capsys):
    doc = run_json(capsys, "shift", "analyze", "--prefix", "0.5,0.75", "--tail-const", "1", "--n", "2")
    v = verdicts(doc)
    assert v["hyponormal"] and not v["subnormal"] and v["2_subnormal"]
    assert not v["quadratically_hyponormal"]
    assert doc["extras"]["power_decomposition"]["components"][0]["prefix"] == ["3/8"]


def test_shift_three_weight_prefix(capsys):
    doc = run_json(capsys, "shift", "analyze", "--prefix", "0.5,0.6,0.7", "--tail-const", "1",
                   "--n", "3")
    v = verdicts(doc)
    assert v["3_subnormal"]
    doc2 = run_json(capsys, "shift", "analyze", "--prefix", "0.5,0.6,0.7", "--tail-const", "1",
                    "--n", "2")
    assert not verdicts(doc2)["2_subnormal"]


def test_constant_shift_all_classes_hold(capsys):
    doc = run_json(capsys, "shift", "analyze", "--tail-const", "1", "--n", "2")
    assert all(verdicts(doc).values())


def test_shift_from_file_and_periodic_tail(capsys, tmp_path):
    path = write(tmp_path, "w.json", {"prefix": [], "tail": {"periodic": ["1", "2"]}})
    doc = run_json(capsys, "shift", "analyze", path)
    v = verdicts(doc)
    assert not v["hyponormal"] and v["2_quasinormal"] and v["quasi_2_normal"]


def test_exact_flag_reads_floats_as_rationals(capsys, tmp_path):
    path = write(tmp_path, "w.json", {"prefix": [0.5, 0.75], "tail": {"constant": 1}})
    doc = run_json(capsys, "shift", "analyze", path, "--exact")
    assert doc["input"]["weights"]["prefix"] == ["1/2", "3/4"]
    doc = run_json(capsys, "shift", "analyze", path)
    assert doc["input"]["weights"]["prefix"] == [0.5, 0.75]


def test_kmax_controls_k_tests(capsys):
    doc = run_json(capsys, "shift", "analyze", "--prefix", "1/2,3/4", "--kmax", "4")
    names = [v["class_name"] for v in doc["verdicts"]]
    assert {"2_hyponormal", "3_hyponormal", "4_hyponormal"} <= set(names)


# -- derive-quasinormal ----------------------------------------------------------------


def test_derive_exact(capsys):
    code, out, _ = run(capsys, "shift", "derive-quasinormal", "--n", "2", "--seed", "1,4/5,9/10",
                       "--steps", "8", "--exact")
    assert code == 0
    first = out.splitlines()[0].split(", ")
    assert first[:8] == ["1", "4/5", "9/10", "8/9", "81/100", "80/81", "729/1000", "800/729"]


def test_derive_periodic_seed(capsys):
    doc = run_json(capsys, "shift", "derive-quasinormal", "--n", "2", "--seed", "1,4/5,1",
                   "--exact")
    assert doc["extras"]["continuation"][:6] == ["1", "4/5"] * 3
    (v,) = doc["verdicts"]
    assert v["holds"] and v["certificate"]["data"]["period"] == 2


def test_derive_n3_float_seed_period_3(capsys):
    doc = run_json(capsys, "shift", "derive-quasinormal", "--n", "3", "--seed", "1,0.7,0.5,1,0.7")
    (v,) = doc["verdicts"]
    assert v["holds"] and v["certificate"]["data"]["period"] == 3
    assert v["residual"] == 0.0


def test_derive_escaping_seed(capsys):
    doc = run_json(capsys, "shift", "derive-quasinormal", "--n", "2", "--seed", "1,1,0.9",
                   "--bound", "10")
    (v,) = doc["verdicts"]
    assert not v["holds"] and v["certificate"]["data"]["escaped_at"] == 44


def test_derive_seed_length_is_input_error(capsys):
    code, _, err = run(capsys, "shift", "derive-quasinormal", "--n", "2", "--seed", "1,2")
    assert code == 2 and "seed must have 3 entries" in err


# -- matrix / toeplitz / extend ---------------------------------------------------------


def test_matrix_traceless(capsys, tmp_path):
    path = write(tmp_path, "m.json", {"rows": 2, "cols": 2, "entries": [1, 2, 0, -1]})
    doc = run_json(capsys, "matrix", "analyze", path, "--n", "2")
    v = verdicts(doc)
    assert not v["normal"] and v["2_normal"] and not v["hyponormal"]


def test_toeplitz_z_nilpotent(capsys, tmp_path):
    sym = {"block_size": 2, "coeffs": {"1": {"rows": 2, "cols": 2, "entries": [0, 1, 0, 0]}}}
    path = write(tmp_path, "s.json", sym)
    doc = run_json(capsys, "toeplitz", "analyze", path, "--order", "16", "--n", "2")
    v = verdicts(doc)
    assert v["2_normal"] and not v["hyponormal"] and not v["symbol_normal_ae"]
    assert doc["extras"]["power_is_zero"] is True


def test_extend_generated(capsys):
    doc = run_json(capsys, "extend", "analyze", "--generate", "6", "--seed", "11")
    v = verdicts(doc)
    assert all(v.values())
    povm = next(x for x in doc["verdicts"] if x["class_name"] == "povm_moments")
    assert povm["residual"] < 1e-9


def test_extend_from_file(capsys, tmp_path):
    from opclass.extensions import random_rr_spec

    spec = random_rr_spec(np.random.default_rng(8), k=2, a_dim=1)
    path = write(tmp_path, "e.json", spec.to_json())
    doc = run_json(capsys, "extend", "analyze", path)
    assert all(verdicts(doc).values())
    assert doc["input"]["spec"]["n"] == 2


def test_extend_rejects_non_invariant_subspace(capsys, tmp_path):
    doc = {"ambient": {"rows": 2, "cols": 2, "entries": [0, 1, 0, 0]},
           "subspace_basis": {"rows": 2, "cols": 1, "entries": [0, 1]}, "n": 2}
    code, _, err = run(capsys, "extend", "analyze", write(tmp_path, "e.json", doc))
    assert code == 2 and "not invariant" in err


# -- input errors --------------------------------------------------------------------------


def test_schema_error_reports_json_pointer(capsys, tmp_path):
    path = write(tmp_path, "m.json", {"rows": 2, "cols": 2, "entries": [1, "x", 0, -1]})
    code, _, err = run(capsys, "matrix", "analyze", path)
    assert code == 2 and "/entries/1" in err


def test_weight_schema_pointer(capsys, tmp_path):
    path = write(tmp_path, "w.json", {"prefix": [1, "-2"], "tail": {"constant": 1}})
    code, _, err = run(capsys, "shift", "analyze", path)
    assert code == 2 and "/prefix/1" in err


def test_symbol_schema_pointer(capsys, tmp_path):
    path = write(tmp_path, "s.json", {"block_size": 2, "coeffs": {"1": {"rows": 2}}})
    code, _, err = run(capsys, "toeplitz", "analyze", path)
    assert code == 2 and "/coeffs/1" in err


def test_nonpositive_weight_is_input_error(capsys):
    code, _, err = run(capsys, "shift", "analyze", "--prefix", "0,1")
    assert code == 2 and "positive" in err


def test_bad_json_and_missing_file(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(capsys, "matrix", "analyze", str(p))[0] == 2
    assert run(capsys, "matrix", "analyze", str(tmp_path / "nope.json"))[0] == 2


def test_unknown_arguments_exit_2(capsys):
    assert run(capsys, "shift", "frobnicate")[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_env_tolerance(capsys, monkeypatch):
    monkeypatch.setenv("OPCLASS_TOL", "1e-3")
    doc = run_json(capsys, "shift", "analyze", "--tail-const", "1")
    assert doc["tolerances"]["tol"] == 1e-3
    monkeypatch.setenv("OPCLASS_TOL", "nan-ish")
    assert run(capsys, "shift", "analyze", "--tail-const", "1")[0] == 2


def test_expectations_drive_exit_code(capsys, tmp_path):
    path = write(tmp_path, "m.json", {"rows": 2, "cols": 2, "entries": [1, 2, 0, -1]})
    assert run(capsys, "matrix", "analyze", path, "--expect", "2_normal=holds")[0] == 0
    code, _, err = run(capsys, "matrix", "analyze", path, "--expect", "normal=holds")
    assert code == 1 and "mismatch" in err
    assert run(capsys, "matrix", "analyze", path, "--expect", "normal=maybe")[0] == 2


# -- reports ----------------------------------------------------------------------------------


def test_reports_are_byte_identical(capsys, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        code, _, _ = run(capsys, "extend", "analyze", "--generate", "3", "--seed", "5",
                         "--json", str(out))
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_echoed_input_reproduces_verdicts(capsys, tmp_path):
    doc = run_json(capsys, "shift", "analyze", "--prefix", "1/2,3/5,7/10", "--n", "3")
    path = write(tmp_path, "echo.json", doc["input"]["weights"])
    again = run_json(capsys, "shift", "analyze", path, "--n", str(doc["input"]["n"]),
                     "--kmax", str(doc["input"]["kmax"]))
    assert again["verdicts"] == doc["verdicts"]


def test_markdown_output(capsys):
    code, out, _ = run(capsys, "shift", "analyze", "--tail-const", "1")
    assert code == 0
    assert out.startswith("# opclass shift analyze")
    assert "| subnormal | yes |" in out


# -- registry ---------------------------------------------------------------------------------


def test_registry_full_run(capsys):
    code, out, _ = run(capsys, "registry", "run")
    assert code == 0
    assert "FAIL" not in out
    assert out.count("PASS") == sum(len(e.claims) for e in registry.REGISTRY)


def test_registry_filter_single_entry(capsys):
    code, out, _ = run(capsys, "registry", "run", "--filter", "traceless")
    assert code == 0
    assert {line.split()[1] for line in out.splitlines() if line.startswith("PASS")} == {
        "traceless-upper-triangular"}


def test_registry_filter_without_match(capsys):
    assert run(capsys, "registry", "run", "--filter", "no-such-entry")[0] == 2


def test_registry_corrupted_expectation_fails(capsys, monkeypatch, tmp_path):
    entries = list(registry.REGISTRY)
    entries[2] = registry.with_flipped_claim(entries[2], 0)
    monkeypatch.setattr(registry, "REGISTRY", tuple(entries))
    out_json = tmp_path / "reg.json"
    code, out, _ = run(capsys, "registry", "run", "--json", str(out_json))
    assert code == 1
    fails = [line for line in out.splitlines() if line.startswith("FAIL")]
    assert len(fails) == 1 and entries[2].name in fails[0]
    assert json.loads(out_json.read_text())["all_passed"] is False


def test_registry_crash_counts_as_failure():
    def boom(spec):
        raise RuntimeError("kaput")

    entry = registry.RegistryEntry("broken", registry.REGISTRY[0].witness,
                                   (registry.Claim("x", True, boom),), "test double")
    (res,) = registry.run([entry])
    assert not res.passed and "kaput" in res.error


def test_registry_results_keep_entry_order():
    results = registry.run(registry.REGISTRY, workers=8)
    names = [r.entry for r in results]
    expected = [e.name for e in registry.REGISTRY for _ in e.claims]
    assert names == expected


def test_registry_provenance_present():
    for e in registry.REGISTRY:
        assert e.provenance and e.claims
