"""Front-to-back pipeline: parse, check, translate, evaluate."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .dual import Dual
from .errors import AdevRuntimeError
from .parser import parse_program
from .runtime import RuntimeConfig, apply, eval_closed, use_config
from .syntax import Program
from .transform import ad_term, wrap_derivative, wrap_primal, wrap_witness
from .typecheck import EntryDescriptor, check_entry, domain


@dataclass
class Compiled:
    program: Program
    entry: EntryDescriptor
    target: object  # ⟦t⟧
    config: RuntimeConfig = field(default_factory=RuntimeConfig)
    _value: object = field(default=None, repr=False)

    @property
    def name(self):
        return self.program.name

    @property
    def base(self):
        return self.entry.base

    def value(self):
        """The evaluated translated entry function ⟦t⟧ as a runtime closure."""
        if self._value is None:
            with use_config(self.config):
                self._value = eval_closed(self.target)
        return self._value

    def check_theta(self, theta: float):
        lo, hi = domain(self.base)
        if not lo < theta < hi:
            raise AdevRuntimeError(f"θ = {theta!r} is outside the domain of {self.base.kind}")

    def translated_at(self, theta: float):
        """⟦t⟧ (θ, 1): the pair (dual estimator, witness)."""
        self.check_theta(theta)
        with use_config(self.config):
            return apply(self.value(), Dual(float(theta), 1.0))

    def estimator(self, theta: float):
        return self.translated_at(theta)[0]

    def witness(self, theta: float):
        return self.translated_at(theta)[1]

    def derivative_term(self):
        return wrap_derivative(self.entry)

    def primal_term(self):
        return wrap_primal(self.entry)

    def witness_term(self):
        return wrap_witness(self.entry)


def compile_program(source, name=None, config: RuntimeConfig | None = None) -> Compiled:
    """Compile a Program, source text, or path to a .adev file."""
    if isinstance(source, Path) or (isinstance(source, str) and source.endswith(".adev")
                                    and "\n" not in source and Path(source).exists()):
        path = Path(source)
        program = parse_program(path.read_text(encoding="utf-8"), name or path.stem)
    elif isinstance(source, Program):
        program = source
    else:
        program = parse_program(source, name or "<program>")
    entry = check_entry(program)
    return Compiled(program, entry, ad_term(entry.term), config or RuntimeConfig())
