"""Deterministic runner-protocol stub for harness and CLI tests.

The candidate "source" is a JSON script telling the stub what to do:

    {"behavior": "replay", "records": {"<case_id>": {...record...}},
     "default": {...record...}}
    {"behavior": "identity_times", "scale": 1.0}   # ok, output=input, fixed timings
    {"behavior": "hang"}                           # report nothing, sleep forever
    {"behavior": "hang_after", "n": 2}             # report n cases then hang
    {"behavior": "crash"}                          # nonzero exit (protocol failure)

"identity_times" emits ok records whose timings are scale * (1 + case
position) milliseconds and whose output equals the input, so reference
measurement is fully deterministic.
"""

import json
import sys
import time


def emit(record):
    sys.stdout.write(json.dumps(record) + "\n")
    sys.stdout.flush()


def main():
    job = json.loads(open(sys.argv[1], encoding="utf-8").read())
    spec = json.loads(job["candidate_source"])
    behavior = spec.get("behavior", "replay")
    if behavior == "crash":
        sys.stderr.write("stub crash requested\n")
        sys.exit(7)
    if behavior == "hang":
        time.sleep(10**6)
    repeats = job["repeats"]
    for pos, case in enumerate(job["cases"]):
        if behavior == "hang_after" and pos >= spec["n"]:
            time.sleep(10**6)
        if behavior == "identity_times":
            t = spec.get("scale", 1.0) * (1 + pos) * 1e-3
            record = {
                "case_id": case["case_id"],
                "status": "ok",
                "timings_s": [t] * repeats,
                "diagnostics": "",
            }
            if job.get("capture_output"):
                record["output"] = case["input"]
            emit(record)
            continue
        record = spec.get("records", {}).get(case["case_id"], spec.get("default"))
        if record is None:
            record = {"case_id": case["case_id"], "status": "ok",
                      "timings_s": [1e-3] * repeats, "diagnostics": ""}
        record = dict(record)
        record["case_id"] = case["case_id"]
        emit(record)


if __name__ == "__main__":
    main()
