"""The world: functions, definitions, rewrite rules, and the ambient theory.

One World is built per input file.  Rewriting consults a theory (a set of
enabled rule and definition names) that usually starts from the ambient
set and is refined per goal by :IN-THEORY hints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .term import BUILTIN_ARITY, App, LamApp, builtin_macro_env


class WorldError(Exception):
    pass


@dataclass(frozen=True)
class Definition:
    name: str
    formals: tuple
    body: object
    recursive: bool


@dataclass(frozen=True)
class RewriteRule:
    name: str
    lhs: object
    rhs: object
    hyps: tuple
    equiv: str  # "EQUAL" or "IFF"


@dataclass(frozen=True)
class HintFn:
    name: str
    arity: int
    run: object  # callable(args, ctx) -> hint value


def _calls(t, name: str) -> bool:
    if isinstance(t, App):
        return t.fn == name or any(_calls(a, name) for a in t.args)
    if isinstance(t, LamApp):
        return _calls(t.body, name) or any(_calls(a, name) for a in t.actuals)
    return False


@dataclass
class World:
    functions: dict = field(default_factory=dict)
    definitions: dict = field(default_factory=dict)
    rules: dict = field(default_factory=dict)
    rule_order: list = field(default_factory=list)
    theorems: dict = field(default_factory=dict)
    macro_env: dict = field(default_factory=builtin_macro_env)
    hint_fns: dict = field(default_factory=dict)
    clause_processors: dict = field(default_factory=dict)
    enabled: set = field(default_factory=set)

    def arity(self, name: str):
        a = BUILTIN_ARITY.get(name)
        if a is not None:
            return a
        return self.functions.get(name)

    def _claim_name(self, name: str):
        if name in BUILTIN_ARITY or name == "APPEND":
            raise WorldError(f"{name} is built in")
        if name in self.functions or name in self.rules or name in self.theorems:
            raise WorldError(f"duplicate name: {name}")

    def add_stub(self, name: str, arity: int):
        self._claim_name(name)
        self.functions[name] = arity

    def add_definition(self, name: str, formals, body, enabled: bool = True):
        self._claim_name(name)
        self.functions[name] = len(formals)
        self.definitions[name] = Definition(
            name, tuple(formals), body, recursive=_calls(body, name)
        )
        self.rule_order.append(("defn", name))
        if enabled:
            self.enabled.add(name)

    def add_rule(self, name: str, rule: RewriteRule, enabled: bool = True):
        if name in self.rules:
            raise WorldError(f"duplicate rule: {name}")
        self.rules[name] = rule
        self.rule_order.append(("rule", name))
        if enabled:
            self.enabled.add(name)

    def add_theorem(self, name: str, body):
        if name in self.theorems or name in self.functions:
            raise WorldError(f"duplicate name: {name}")
        self.theorems[name] = body

    def add_hint_fn(self, fn: HintFn):
        if fn.name in self.hint_fns:
            raise WorldError(f"duplicate hint function: {fn.name}")
        self.hint_fns[fn.name] = fn

    def add_clause_processor(self, name: str, fn):
        self.clause_processors[name] = fn

    def enable(self, names):
        for n in names:
            self.enabled.add(n)

    def disable(self, names):
        for n in names:
            self.enabled.discard(n)

    def theory(self) -> frozenset:
        return frozenset(self.enabled)
