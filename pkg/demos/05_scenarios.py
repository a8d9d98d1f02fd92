"""
Scenario files and sweeps
=========================

The same analyses driven by a config mapping, as the command line does.
Writing this mapping to YAML and running `evodich sweep file.yaml` gives
the same table.
"""

from evodich.scenario import run_scenario, run_sweep

system = {"kind": "scalar-closed-form", "name": "-1+sin"}

report = run_scenario({"system": system, "analysis": "dichotomy", "numeric": {"window": 16}})
print(report.verdict, report.results["margin"], report.results["certificate"]["lambda"])

_, summary = run_sweep({
    "system": system,
    "analysis": "sweep",
    "sweep": {"analysis": "dichotomy", "grid": {"window": [8, 16, 32, 64]}},
})
for row in summary["table"]:
    print(row)
