"""CLI surface: subcommands, exit codes, config precedence, session logs."""

from __future__ import annotations

import json
from importlib import resources

import pytest

from ontoslice import cli

TOY_PATH = str(resources.files("ontoslice").joinpath("data/toy_telecom.ttl"))
BUNDLE = resources.files("ontoslice").joinpath("data/transcripts/plans_per_customer.json")


@pytest.fixture()
def transcript_file(tmp_path) -> str:
    target = tmp_path / "transcript.json"
    target.write_text(BUNDLE.read_text("utf-8"), encoding="utf-8")
    return str(target)


def run(capsys, *argv) -> tuple[int, str, str]:
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- ingest ----------------------------------------------------------------------

def test_ingest_toy(capsys):
    code, out, _err = run(capsys, "ingest", TOY_PATH)
    assert code == 0
    assert "concepts: 11" in out
    assert "axioms: " in out


def test_ingest_malformed_file(capsys, tmp_path):
    bad = tmp_path / "bad.ttl"
    bad.write_text("missing:Thing a missing:Type .\n", encoding="utf-8")
    code, _out, err = run(capsys, "ingest", str(bad))
    assert code == cli.EXIT_INPUT
    assert "1:" in err  # line-numbered diagnostic


def test_ingest_missing_file(capsys):
    code, _out, err = run(capsys, "ingest", "/nonexistent/file.ttl")
    assert code == cli.EXIT_INPUT
    assert "cannot read" in err


def test_ingest_generated_scale_file(capsys, tmp_path):
    out_file = tmp_path / "scale.ttl"
    code, out, _ = run(capsys, "gen", "--seed", "7", "-o", str(out_file))
    assert code == 0
    code, out, _ = run(capsys, "ingest", str(out_file))
    assert code == 0
    axioms = int([l for l in out.splitlines() if l.startswith("axioms:")][0].split()[1])
    assert axioms > 7000


# -- ask --------------------------------------------------------------------------

def test_ask_golden_transcript(capsys, tmp_path, transcript_file):
    question = json.loads(BUNDLE.read_text("utf-8"))["question"]
    code, out, _err = run(
        capsys,
        "ask", question,
        "--ontology", TOY_PATH,
        "--transcript", transcript_file,
        "--log-dir", str(tmp_path / "logs"),
    )
    assert code == 0
    assert "SELECT ?customerName ?planName" in out
    logs = list((tmp_path / "logs").glob("*.json"))
    assert len(logs) == 1
    payload = json.loads(logs[0].read_text("utf-8"))
    assert payload["outcome"]["state"] == "done"


def test_ask_no_progress_exit_code(capsys, tmp_path):
    report = json.dumps(
        {"missing_concepts": [], "missing_links": [{"from": "customer", "to": "region"}]}
    )
    entries = [
        {"phase": "approximation", "match": "any",
         "response": '```json\n{"concepts": ["Customer"], "relationships": []}\n```'},
        {"phase": "refinement", "match": "any", "response": f"```json\n{report}\n```"},
        {"phase": "refinement", "match": "any", "response": f"```json\n{report}\n```"},
    ]
    transcript = tmp_path / "loop.json"
    transcript.write_text(json.dumps(entries), encoding="utf-8")
    code, _out, err = run(
        capsys,
        "ask", "q?",
        "--ontology", TOY_PATH,
        "--transcript", str(transcript),
        "--log-dir", str(tmp_path / "logs"),
    )
    assert code == cli.EXIT_NO_PROGRESS
    assert "no-progress" in err
    assert list((tmp_path / "logs").glob("*.json"))  # log written on failure too


def test_ask_missing_config_file(capsys):
    code, _out, err = run(capsys, "ask", "q?", "--config", "/nonexistent/config.json")
    assert code == cli.EXIT_USAGE
    assert "config" in err


def test_ask_without_provider_is_usage_error(capsys, tmp_path):
    code, _out, err = run(
        capsys, "ask", "q?", "--ontology", TOY_PATH, "--log-dir", str(tmp_path)
    )
    assert code == cli.EXIT_USAGE
    assert "endpoint" in err


def test_ask_reads_config_file(capsys, tmp_path, transcript_file):
    config = {
        "ontology": TOY_PATH,
        "log_dir": str(tmp_path / "logs"),
        "provider": {"kind": "scripted", "transcript": transcript_file},
    }
    config_path = tmp_path / "ontoslice.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    question = json.loads(BUNDLE.read_text("utf-8"))["question"]
    code, out, _err = run(capsys, "ask", question, "--config", str(config_path))
    assert code == 0
    assert "SELECT" in out


def test_flags_override_config_file(capsys, tmp_path, transcript_file):
    # The file points at a transcript that will fail fast; the flag must win.
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps([{"phase": "translation", "match": "any", "response": "x"}]))
    config = {
        "ontology": TOY_PATH,
        "log_dir": str(tmp_path / "logs"),
        "provider": {"kind": "scripted", "transcript": str(broken)},
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    question = json.loads(BUNDLE.read_text("utf-8"))["question"]
    code, out, _err = run(
        capsys, "ask", question, "--config", str(config_path), "--transcript", transcript_file
    )
    assert code == 0
    assert "SELECT" in out


def test_ask_config_via_environment(capsys, tmp_path, transcript_file, monkeypatch):
    config = {
        "ontology": TOY_PATH,
        "log_dir": str(tmp_path / "logs"),
        "provider": {"kind": "scripted", "transcript": transcript_file},
    }
    config_path = tmp_path / "env-config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    monkeypatch.setenv(cli.CONFIG_ENV_VAR, str(config_path))
    question = json.loads(BUNDLE.read_text("utf-8"))["question"]
    code, out, _err = run(capsys, "ask", question)
    assert code == 0
    assert "SELECT" in out


# -- slice / path -------------------------------------------------------------------

def test_slice_prints_closed_slice(capsys):
    code, out, _err = run(capsys, "slice", "--ontology", TOY_PATH, "has plan")
    assert code == 0
    data = json.loads(out)
    assert "http://example.org/telecom#Customer" in data["concepts"]
    assert "http://example.org/telecom#hasPlan" in data["relationships"]


def test_slice_unknown_name(capsys):
    code, _out, err = run(capsys, "slice", "--ontology", TOY_PATH, "flux capacitor")
    assert code == cli.EXIT_INPUT
    assert "unresolved: flux capacitor" in err


def test_path_reflexive(capsys):
    code, out, _err = run(capsys, "path", "--ontology", TOY_PATH, "Customer", "Customer")
    assert code == 0
    assert "(empty path)" in out


def test_path_multi_hop(capsys):
    code, out, _err = run(capsys, "path", "--ontology", TOY_PATH, "Invoice", "Region")
    assert code == 0
    lines = [l for l in out.splitlines() if l]
    assert len(lines) == 2


def test_path_not_found_within_hops(capsys):
    code, _out, err = run(
        capsys, "path", "--ontology", TOY_PATH, "--max-hops", "1", "Customer", "Device"
    )
    assert code == cli.EXIT_INPUT
    assert "no path" in err


# -- validate --------------------------------------------------------------------------

def test_validate_conforming_full_ontology(capsys, tmp_path):
    query = tmp_path / "q.rq"
    query.write_text(
        "PREFIX tel: <http://example.org/telecom#>\n"
        "SELECT ?c WHERE { ?c a tel:Customer . ?c tel:hasPlan ?p }\n",
        encoding="utf-8",
    )
    code, out, _err = run(capsys, "validate", "--ontology", TOY_PATH, str(query))
    assert code == 0
    assert out == ""


def test_validate_against_slice_file(capsys, tmp_path):
    # The slice command's JSON output is directly usable as validate's input.
    code, out, _err = run(capsys, "slice", "--ontology", TOY_PATH, "customer", "has plan")
    assert code == 0
    slice_path = tmp_path / "slice.json"
    slice_path.write_text(out, encoding="utf-8")

    good = tmp_path / "good.rq"
    good.write_text(
        "PREFIX tel: <http://example.org/telecom#>\n"
        "SELECT ?c WHERE { ?c a tel:Customer . ?c tel:hasPlan ?p }\n",
        encoding="utf-8",
    )
    code, out, _err = run(
        capsys, "validate", "--ontology", TOY_PATH, "--slice", str(slice_path), str(good)
    )
    assert (code, out) == (0, "")

    outside = tmp_path / "outside.rq"
    outside.write_text(
        "PREFIX tel: <http://example.org/telecom#>\n"
        "SELECT ?d WHERE { ?d a tel:Device }\n",
        encoding="utf-8",
    )
    code, out, _err = run(
        capsys, "validate", "--ontology", TOY_PATH, "--slice", str(slice_path), str(outside)
    )
    assert code == cli.EXIT_NONCONFORMING
    assert "unknown-class tel:Device" in out


def test_validate_violations(capsys, tmp_path):
    query = tmp_path / "bad.rq"
    query.write_text(
        "PREFIX tel: <http://example.org/telecom#>\n"
        "SELECT ?c WHERE { ?c a tel:Spaceship . ?c tel:hasPaln ?p }\n",
        encoding="utf-8",
    )
    code, out, _err = run(capsys, "validate", "--ontology", TOY_PATH, str(query))
    assert code == cli.EXIT_NONCONFORMING
    assert "unknown-class tel:Spaceship" in out
    assert "unknown-predicate tel:hasPaln" in out


# -- gen / verbalize ----------------------------------------------------------------

def test_gen_components_flag(capsys, tmp_path):
    out_file = tmp_path / "comp.ttl"
    code, out, _err = run(
        capsys, "gen", "--seed", "3", "--concepts", "12", "--relationships", "14",
        "--attributes", "4", "--components", "3", "-o", str(out_file),
    )
    assert code == 0
    from ontoslice.turtleio import parse_turtle
    from conftest import component_count

    parsed = parse_turtle(out_file.read_text("utf-8"))
    assert component_count(parsed.ontology) == 3


def test_gen_invalid_spec_is_usage_error(capsys, tmp_path):
    code, _out, err = run(
        capsys, "gen", "--concepts", "10", "--relationships", "2", "-o", str(tmp_path / "x.ttl")
    )
    assert code == cli.EXIT_USAGE
    assert "invalid generator spec" in err


def test_verbalize_catalog_and_formal(capsys):
    code, out, _err = run(capsys, "verbalize", "--ontology", TOY_PATH)
    assert code == 0
    assert out.splitlines()[0].startswith("Concept: ")
    code, formal, _err = run(capsys, "verbalize", "--ontology", TOY_PATH, "--formal")
    assert code == 0
    assert formal.startswith("@prefix")
    code, names_only, _err = run(capsys, "verbalize", "--ontology", TOY_PATH, "--names-only")
    assert code == 0
    assert "connects" not in names_only


# -- exit code table ------------------------------------------------------------------

def test_exit_codes_distinct_and_total():
    codes = [
        cli.EXIT_OK, cli.EXIT_INPUT, cli.EXIT_USAGE, cli.EXIT_PROVIDER,
        cli.EXIT_NO_PROGRESS, cli.EXIT_STEP_LIMIT, cli.EXIT_NONCONFORMING,
        cli.EXIT_BUDGET, cli.EXIT_UNPARSEABLE,
    ]
    assert len(codes) == len(set(codes))
    from ontoslice import pipeline

    assert set(cli.FAILURE_EXIT_CODES) == set(pipeline.FAILURE_KINDS)


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        cli.main(["unknown-command"])
    assert err.value.code == cli.EXIT_USAGE
