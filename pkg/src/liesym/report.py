"""Machine-readable reports for the command line.

The structured document has the fixed top-level fields {tool_version,
command, inputs, verdict, certificates, seed} and serializes
deterministically: exact rationals render as num/den strings, keys are
sorted, floats use repr.  Timing is shown on the human side only so that
reports are byte-identical across runs with fixed seeds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from . import __version__
from .expr import Expr


def _plain(value) -> Any:
    if isinstance(value, Expr):
        from .dsl import render

        return render(value)
    if isinstance(value, Fraction):
        return (str(value.numerator) if value.denominator == 1
                else f"{value.numerator}/{value.denominator}")
    if isinstance(value, float):
        return value
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass
class Report:
    command: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    verdict: str = ""
    certificates: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    human_lines: List[str] = field(default_factory=list)
    exit_code: int = 0

    def add(self, line: str):
        self.human_lines.append(line)

    def document(self) -> Dict[str, Any]:
        return {
            "tool_version": __version__,
            "command": self.command,
            "inputs": _plain(self.inputs),
            "verdict": self.verdict,
            "certificates": _plain(self.certificates),
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.document(), sort_keys=True, indent=2) + "\n"

    def human(self) -> str:
        head = [f"liesym {self.command}: {self.verdict}"]
        return "\n".join(head + self.human_lines)
