"""Regenerate the preset-fidelity regression fixtures.

Runs every (gate, scheme) preset combination once with integration
tolerances tightened to rtol = 1e-12 / atol = 1e-15 and freezes the
resulting fidelities. The regression test compares default-tolerance runs
against these numbers within 1e-6.

Usage: python tests/generate_fixtures.py
"""

import json
from dataclasses import replace
from pathlib import Path

from sqrsim.evolve import Scheme, run
from sqrsim.harness import GATE_ANGLES, preset

OUT = Path(__file__).parent / "data" / "preset_fidelities.json"


def main() -> None:
    fixtures = {}
    for name in sorted(GATE_ANGLES):
        for scheme in (Scheme.BARE, Scheme.SC1, Scheme.SC2):
            pre = preset(name, scheme=scheme)
            cfg = replace(pre.cfg, rtol=1e-12, atol=1e-15)
            trace = run(scheme, pre.gate, cfg)
            fixtures[f"{name}/{scheme.value}"] = trace.fidelity
            print(f"{name}/{scheme.value}: {trace.fidelity!r}")
    OUT.parent.mkdir(exist_ok=True)
    OUT.write_text(json.dumps(fixtures, indent=2) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
