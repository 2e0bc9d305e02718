"""End-to-end checks of the qfound command line: exit codes, emitted files,
manifest digests and schema validation."""

import hashlib
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource

TOOL = sys.argv[1]
SCHEMAS = pathlib.Path(sys.argv[2])
FAILURES = []


def check(ok, what):
    print(("ok   " if ok else "FAIL ") + what)
    if not ok:
        FAILURES.append(what)


def qfound(*args):
    return subprocess.run([TOOL, *args], capture_output=True, text=True)


def registry():
    reg = Registry()
    for p in SCHEMAS.glob("*.schema.json"):
        doc = json.loads(p.read_text())
        reg = reg.with_resource(doc["$id"], Resource.from_contents(doc))
    return reg


REGISTRY = registry()
SCHEMA_FOR = {
    "manifest.json": "manifest.schema.json",
    "reports.json": "reports.schema.json",
    "claims.json": "claims.schema.json",
    "joint_distribution.json": "joint_distribution.schema.json",
    "path_records.json": "path_records.schema.json",
    "setting_dependence.json": "setting_dependence.schema.json",
    "report.json": "pilotwave_report.schema.json",
    "chsh.json": "chsh.schema.json",
}


def validate_dir(out, label):
    manifest = json.loads((out / "manifest.json").read_text())
    for entry in manifest["files"]:
        data = (out / entry["path"]).read_bytes()
        check(hashlib.sha256(data).hexdigest() == entry["sha256"] and len(data) == entry["bytes"],
              f"{label}: digest of {entry['path']}")
    for p in sorted(out.rglob("*.json")):
        schema_id = SCHEMA_FOR.get(p.name)
        check(schema_id is not None, f"{label}: {p.name} has a schema")
        if schema_id is None:
            continue
        schema = REGISTRY.contents(schema_id)
        validator = jsonschema.Draft202012Validator(schema, registry=REGISTRY)
        errors = list(validator.iter_errors(json.loads(p.read_text())))
        check(not errors, f"{label}: {p.name} validates" + (f" ({errors[0].message})" if errors else ""))
    return manifest


def main():
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="qfound_e2e_"))

    r = qfound("schema")
    names = r.stdout.split()
    check(r.returncode == 0 and "config.schema.json" in names, "schema lists schemas")
    for n in names:
        r = qfound("schema", n)
        shipped = json.loads((SCHEMAS / n).read_text())
        check(r.returncode == 0 and json.loads(r.stdout) == shipped, f"schema {n} matches docs")
        jsonschema.Draft202012Validator.check_schema(shipped)
    check(qfound("schema", "nope").returncode == 1, "unknown schema exits 1")

    out = tmp / "eraser"
    r = qfound("run", "eraser", "--left", "interference", "--right", "whichpath", "--mode", "analytic",
               "--out", str(out))
    check(r.returncode == 0, "run eraser exits 0")
    dist = json.loads((out / "joint_distribution.json").read_text())
    check([e["probability"] for e in dist["probabilities"]] == [0.25] * 4, "eraser I/W probabilities all 1/4")
    validate_dir(out, "eraser")

    out = tmp / "eraser_mc"
    r = qfound("run", "eraser", "--mode", "montecarlo", "--trials", "20000", "--seed", "5", "--out", str(out))
    check(r.returncode == 0, "run eraser montecarlo exits 0")
    validate_dir(out, "eraser_mc")
    r = qfound("plot", str(out / "path_records.json"), "-o", str(tmp / "records.svg"))
    check(r.returncode == 0 and (tmp / "records.svg").read_text().startswith("<svg"), "plot path records")

    out = tmp / "free"
    r = qfound("run", "free_packet", "--dt", "0.001", "--steps", "2000", "--out", str(out))
    check(r.returncode == 0, "run free_packet exits 0")
    rep = json.loads((out / "report.json").read_text())
    check(rep["equivariance"]["ks"] < 0.02, f"free_packet KS {rep['equivariance']['ks']:.4f} < 0.02")
    header = (out / "trajectories.csv").read_text().splitlines()[0]
    check(header == "trajectory_id,time,q1", "trajectory CSV header")
    validate_dir(out, "free_packet")

    out = tmp / "slit"
    r = qfound("run", "double_slit", "--snapshots", "true", "--save-every", "1000", "--out", str(out))
    check(r.returncode == 0, "run double_slit exits 0")
    snaps = sorted(p.name for p in (out / "snapshots").iterdir())
    check(snaps == ["snapshot_0000.csv", "snapshot_1000.csv", "snapshot_2000.csv", "snapshot_3000.csv"],
          "snapshot names zero-padded")
    check((out / "snapshots" / snaps[0]).read_text().startswith("q1,re,im\n"), "snapshot header")
    validate_dir(out, "double_slit")
    r = qfound("plot", str(out / "trajectories.csv"))
    check(r.returncode == 0 and r.stdout.count("<polyline") == 200, "plot double-slit trajectories")

    for scenario in ("harmonic", "repeatability", "bell_chsh"):
        out = tmp / scenario
        r = qfound("run", scenario, "--mode", "montecarlo", "--out", str(out))
        check(r.returncode == 0, f"run {scenario} exits 0")
        validate_dir(out, scenario)

    cfg = tmp / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "repeatability", "trials": 100, "seed": 3, "formats": ["json"]}))
    out = tmp / "from_config"
    r = qfound("run", "--config", str(cfg), "--seed", "4", "--out", str(out))
    manifest = json.loads((out / "manifest.json").read_text())
    check(r.returncode == 0 and manifest["config"]["seed"] == 4 and manifest["config"]["trials"] == 100,
          "flags override config")
    check(all(f["format"] == "json" for f in manifest["files"]), "format list from config")

    out = tmp / "claims"
    r = qfound("run", "claims_suite", "--seed", "7", "--out", str(out))
    check(r.returncode == 0, "claims_suite --seed 7 exits 0")
    claims = json.loads((out / "claims.json").read_text())
    check(claims["mismatches"] == 0, "every claim at its expected verdict")
    validate_dir(out, "claims_suite")

    # Errors.
    check(qfound().returncode == 1, "no verb exits 1")
    check(qfound("run", "nosuch").returncode == 1, "unknown scenario exits 1")
    r = qfound("run", "eraser", "--trials", "0")
    check(r.returncode == 1 and "trials" in r.stderr, "invalid trials exits 1 naming the field")
    bad = tmp / "bad.json"
    bad.write_text('{\n  "scenario": "eraser",\n  "seed": ,\n}\n')
    r = qfound("run", "--config", str(bad))
    check(r.returncode == 1 and "line 3" in r.stderr, "config syntax error exits 1 with line")
    blocker = tmp / "blocker"
    blocker.write_text("x")
    r = qfound("run", "eraser", "--out", str(blocker / "sub"))
    check(r.returncode == 2, "unreachable output directory exits 2")
    r = qfound("run", "free_packet", "--dt", "1", "--out", str(tmp / "unstable"))
    check(r.returncode == 2, "unstable time step exits 2")
    malformed = tmp / "malformed.csv"
    malformed.write_text("trajectory_id,time,q1\n0,0,1\n0,0.5\n")
    r = qfound("plot", str(malformed))
    check(r.returncode == 1 and "row 3" in r.stderr, "malformed CSV names the row")
    empty = tmp / "empty.csv"
    empty.write_text("")
    r = qfound("plot", str(empty))
    check(r.returncode == 0 and "class=\"axes\"" in r.stdout and "<polyline" not in r.stdout, "empty CSV plots axes")

    print(f"{len(FAILURES)} failure(s)")
    return 1 if FAILURES else 0


if __name__ == "__main__":
    sys.exit(main())
