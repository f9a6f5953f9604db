"""Walk the bundled TDSP model through the whole toolchain.

    python3 demos/tdsp_walkthrough.py [outdir]

Compiles the model, writes BPMN and HTML next to each other, then enacts it
up to the point where the customer signs off on the delivered system.
"""
import sys
import tempfile
from pathlib import Path

from mlproc import corpus
from mlproc import enactment as en
from mlproc.bpmn import export_bpmn
from mlproc.docgen import generate_html
from mlproc.semantics import compile_source


def main(outdir: Path) -> None:
    result = compile_source(corpus.read())
    for d in result.diagnostics:
        print(d.render("tdsp.mlproc"))
    model = result.model
    acts = list(model.iter_activities())
    print(f"{model.name}: {len(acts)} activities, {len(model.artifacts)} artifacts, "
          f"{len(model.resources)} resources")

    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "tdsp.bpmn").write_text(export_bpmn(model), encoding="utf-8")
    for page in generate_html(model, single_file=False):
        target = outdir / "site" / page.relative_path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(page.body, encoding="utf-8")
    print(f"wrote {outdir / 'tdsp.bpmn'} and {outdir / 'site'}/")

    # let the greedy policy drive until acceptance testing is up next
    inst = en.create_instance(model)
    en.run_greedy(inst, until=lambda i: "customer_acceptance" in i.ready())
    print()
    print(en.status(inst), end="")

    # the sample-data step is optional; a fresh run can drop it
    alt = en.create_instance(model)
    en.run_greedy(alt, until=lambda i: "sample_data" in i.ready())
    en.skip(alt, "sample_data")
    en.run_greedy(alt)
    skipped = [e.activity_id for e in alt.log if e.kind is en.EventKind.ACTIVITY_SKIPPED]
    print(f"\nsecond run skipped {skipped} and finished in {len(alt.log)} events")
    assert en.replay(model, alt.log).states == alt.states


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="tdsp-")))
