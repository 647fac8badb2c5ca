"""The bundled example programs and their closed-form oracles."""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .oracles import eval_expression
from .parser import parse_program
from .syntax import Program

CORPUS_DIR = Path(__file__).parent / "corpus"
MANIFEST = CORPUS_DIR / "manifest.ini"


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    theta: float | None
    n: int
    L: str | None
    dL: str | None
    floor: float
    witness: bool
    expect: str  # "accept" or "reject"
    reject_variable: str | None = None

    @property
    def path(self) -> Path:
        return CORPUS_DIR / f"{self.name}.adev"

    @property
    def source(self) -> str:
        return self.path.read_text(encoding="utf-8")

    def program(self) -> Program:
        return parse_program(self.source, self.name)

    def loss(self, theta: float) -> float:
        return eval_expression(self.L, theta=theta)

    def derivative(self, theta: float) -> float:
        return eval_expression(self.dL, theta=theta)


def _parse_bool(s: str) -> bool:
    return s.strip().lower() in ("yes", "true", "1")


@lru_cache(maxsize=None)
def load_manifest(path: Path = MANIFEST) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep L and dL distinct from l and dl
    cp.read(path, encoding="utf-8")
    out = {}
    for name in cp.sections():
        sec = cp[name]
        theta = sec.get("theta")
        out[name] = CorpusEntry(
            name=name, theta=None if theta is None else float(theta),
            n=int(sec.get("n", "0")), L=sec.get("L"), dL=sec.get("dL"),
            floor=float(sec["floor"]), witness=_parse_bool(sec["witness"]),
            expect=sec["expect"], reject_variable=sec.get("reject_variable"))
    return out


def entries(accepted_only: bool = True):
    return [e for e in load_manifest().values() if e.expect == "accept" or not accepted_only]


def get(name: str) -> CorpusEntry:
    return load_manifest()[name]


def load(name: str) -> Program:
    return get(name).program()


def lookup(program: Program) -> CorpusEntry | None:
    """The manifest entry for a program, if it is a corpus program with unchanged text."""
    e = load_manifest().get(program.name)
    if e is None or not e.path.exists() or e.source != program.text:
        return None
    return e


__all__ = ["CorpusEntry", "load_manifest", "entries", "get", "load", "lookup", "CORPUS_DIR"]
