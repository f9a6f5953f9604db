"""End-to-end acceptance criteria, one test per criterion.

Each test is tagged with ``@criterion(n, title)``; the conftest hook prints a
PASS/FAIL line per criterion at the end of the session.
"""
import shutil
import subprocess
import sys
import time
import xml.etree.ElementTree as ET
from collections import Counter

import pytest

from conftest import TESTS
from generators import emit, generate, generate_with_violations
from oracle import expected_diagnostics
from test_bpmn import check_structure
from test_docgen import check_links
from test_enactment import check_log
from mlproc import corpus
from mlproc import enactment as en
from mlproc.bpmn import BPMN_NS, export_bpmn
from mlproc.docgen import generate_html
from mlproc.semantics import compile_source
from mlproc.syntax import parse, print_canonical

criterion = pytest.mark.criterion


def cli(*args, cwd=None):
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "mlproc", *map(str, args)],
                          capture_output=True, text=True, cwd=cwd)
    return proc, time.perf_counter() - start


def depth(acts):
    return 1 + max((depth(a.children) for a in acts), default=0) if acts else 0


def model_of(source):
    result = compile_source(source)
    assert result.ok, [d.render() for d in result.diagnostics]
    return result.model


@criterion(1, "TDSP corpus fidelity")
def test_tdsp_corpus_fidelity(tdsp_model):
    top = [a.display_name for a in tdsp_model.activities]
    assert top == ["Business understanding", "Data acquisition and understanding",
                   "Modeling", "Operations"]
    explore = next(a for a in tdsp_model.iter_activities()
                   if a.display_name == "Explore and visualize data")
    assert [a.display_name for a in explore.sub_activities] == [
        "Prepare data", "Explore data", "Sample data", "Process data"]

    names = {a.id: a.display_name for a in tdsp_model.artifacts}
    produced = {names[o] for a in tdsp_model.iter_activities() for o in a.outputs}
    for doc in ("Charter document", "Data dictionary", "Data sources", "Modeling report",
                "Solution architecture", "Exit report"):
        assert doc in produced, doc
    platforms = {r.display_name for r in tdsp_model.resources if r.kind.value == "Platform"}
    assert {"Azure Blob Storage", "SQL Server", "HDInsight Hadoop Cluster"} <= platforms

    proc, elapsed = cli("check", corpus.path())
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert proc.stdout.rstrip().endswith("0 error(s), 0 warning(s)")
    assert elapsed < 1.0, f"check took {elapsed:.2f}s"


@criterion(2, "Customer acceptance scenario")
def test_customer_acceptance_scenario(tmp_path):
    source = tmp_path / "tdsp.mlproc"
    shutil.copy(corpus.path(), source)
    proc, elapsed = cli("run", source, "--script", TESTS / "data" / "tdsp_customer_acceptance.script")
    assert proc.returncode == 0, proc.stdout + proc.stderr
    golden = (TESTS / "golden" / "tdsp_customer_acceptance_status.txt").read_text()
    assert proc.stdout.endswith(golden)
    assert elapsed < 1.0, f"scripted run took {elapsed:.2f}s"

    # the golden state itself, read back from the written log
    model = model_of(source.read_text())
    inst = en.replay(model, en.parse_log((tmp_path / "tdsp.mlproc.log").read_text()))
    assert inst.ready() == ["customer_acceptance"]
    assert inst.state("operations") is en.ActivityState.RUNNING
    order = en.execution_order(model)
    ancestors = model.ancestors("customer_acceptance")
    for aid in order[:order.index("customer_acceptance")]:
        expected = en.ActivityState.RUNNING if aid in ancestors else en.ActivityState.COMPLETED
        assert inst.state(aid) is expected, aid


@criterion(3, "BPMN structural suite")
def test_bpmn_structure(tdsp_model):
    text = export_bpmn(tdsp_model)
    root = ET.fromstring(text)
    assert root.tag == "{%s}definitions" % BPMN_NS
    check_structure(tdsp_model, text)


@criterion(4, "Round-trip over 1000 random models")
def test_round_trip_thousand():
    failures = []
    for seed in range(1000):
        gm = generate(seed)
        acts = gm.all_activities()
        assert len(acts) <= 20 and depth(gm.activities) <= 3
        source = emit(gm, noise_seed=seed)
        first = parse(source)
        printed = print_canonical(first.ast) if first.ok else None
        second = parse(printed) if printed is not None else None
        if not (first.ok and second.ok and second.ast == first.ast
                and print_canonical(second.ast) == printed):
            failures.append(seed)
    assert failures == []


@criterion(5, "Validator agrees with brute-force oracle on 1000 models")
def test_validator_oracle_thousand():
    disagreements = []
    for seed in range(1000):
        gm = generate_with_violations(seed)
        result = compile_source(emit(gm, noise_seed=seed))
        got = Counter((d.code, d.subjects) for d in result.diagnostics)
        if got != expected_diagnostics(gm):
            disagreements.append(seed)
    assert disagreements == []


@criterion(6, "Enactment properties on 500 random models")
def test_enactment_five_hundred():
    for seed in range(500):
        model = model_of(emit(generate(seed)))
        inst = en.run_greedy(en.create_instance(model))
        assert inst.log[-1].kind is en.EventKind.INSTANCE_COMPLETED, seed
        check_log(model, inst.log)
        text = en.format_log(inst.log)
        again = en.replay(model, en.parse_log(text))
        assert en.format_log(again.log) == text, seed
        assert en.status(again) == en.status(inst), seed
        assert again.states == inst.states, seed


@criterion(7, "HTML link integrity")
def test_html_links(tdsp_model):
    for single in (True, False):
        check_links(tdsp_model, generate_html(tdsp_model, single_file=single))
    for seed in range(200):
        model = model_of(emit(generate(seed), noise_seed=seed))
        check_links(model, generate_html(model, single_file=seed % 2 == 0))


@criterion(8, "Deterministic CLI output over 3 runs")
def test_determinism(tmp_path):
    source = tmp_path / "tdsp.mlproc"
    shutil.copy(corpus.path(), source)
    runs = []
    for i in range(3):
        check, _ = cli("check", source)
        bpmn = tmp_path / f"run{i}.bpmn"
        cli("export-bpmn", source, "-o", bpmn)
        html = tmp_path / f"run{i}.html"
        cli("export-html", source, "-o", html)
        site = tmp_path / f"site{i}"
        cli("export-html", source, "--multi-file", "-o", site)
        pages = {p.name: p.read_bytes() for p in sorted(site.iterdir())}
        runs.append((check.stdout, bpmn.read_bytes(), html.read_bytes(), pages))
    assert runs[0][1] and runs[0][3]
    assert runs[0] == runs[1] == runs[2]
