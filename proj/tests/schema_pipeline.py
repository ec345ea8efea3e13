#!/usr/bin/env python3
"""Runs synth -> forward -> eval through the CLI and validates every JSON output.

usage: schema_pipeline.py <blinkscope executable> <schema dir> <work dir>
"""

import glob
import json
import os
import shutil
import subprocess
import sys

import jsonschema

SMALL_CONFIG = {
    "model": {"num_queries": 6, "num_iterations": 2, "channels": 16, "num_heads": 4,
              "roi_grid": 3},
    "inference": {"clip_length": 16, "stride": 8, "keep_top": 6},
    "synthetic": {"num_videos": 2, "min_frames": 30, "max_frames": 45,
                  "feature_height": 6, "feature_width": 6},
}


def run(cmd):
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(f"{' '.join(cmd)} exited {proc.returncode}:\n{proc.stderr}")
    return proc.stdout


def load(path):
    with open(path) as f:
        return json.load(f)


def main():
    exe, schema_dir, work = sys.argv[1:4]
    shutil.rmtree(work, ignore_errors=True)
    os.makedirs(work)
    schemas = {name: load(os.path.join(schema_dir, f"{name}.schema.json"))
               for name in ("annotation", "prediction", "report", "config")}
    for schema in schemas.values():
        jsonschema.Draft202012Validator.check_schema(schema)

    def check(kind, doc, label):
        errors = sorted(jsonschema.Draft202012Validator(schemas[kind]).iter_errors(doc),
                        key=lambda e: list(e.path))
        if errors:
            e = errors[0]
            sys.exit(f"{label}: {kind} schema violation at {list(e.path)}: {e.message}")
        print(f"ok  {kind:<10} {label}")

    small = os.path.join(work, "small.json")
    with open(small, "w") as f:
        json.dump(SMALL_CONFIG, f)
    check("config", SMALL_CONFIG, "small.json")

    run([exe, "synth", "--seed", "4", "--out", work, "--config", small])
    check("annotation", load(os.path.join(work, "gt.json")), "gt.json")
    check("config", load(os.path.join(work, "config.json")), "config.json")
    for path in sorted(glob.glob(os.path.join(work, "pred_*.json"))):
        check("prediction", load(path), os.path.basename(path))
        report = json.loads(run([exe, "eval", "--gt", os.path.join(work, "gt.json"),
                                 "--pred", path]))
        check("report", report, "eval " + os.path.basename(path))

    features = sorted(glob.glob(os.path.join(work, "features_*.bin")))
    forward_out = os.path.join(work, "forward.json")
    run([exe, "forward", "--features", *features, "--weights",
         os.path.join(work, "weights.bin"), "--config", os.path.join(work, "config.json"),
         "--out", forward_out])
    check("prediction", load(forward_out), "forward.json")

    report_path = os.path.join(work, "report.json")
    run([exe, "eval", "--gt", os.path.join(work, "gt.json"), "--pred", forward_out,
         "--report", report_path])
    check("report", load(report_path), "report.json")


if __name__ == "__main__":
    main()
