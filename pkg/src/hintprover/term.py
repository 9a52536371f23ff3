"""Internal term representation and the surface-form translator.

Terms are Var, Const, App, and LamApp (a lambda applied to actuals).
Lambdas are kept closed: any variable free in the body but not bound
by the binder list is added as a pass-through formal, so substitution
never needs to look inside a body for outside variables.
"""

from __future__ import annotations

from dataclasses import dataclass

from .sexpr import (
    NIL, Keyword, Nil, Pair, Symbol, T,
    from_list, is_nil, is_proper_list, print_sexpr, to_list,
    QUASIQUOTE, QUOTE, UNQUOTE, UNQUOTE_SPLICING,
)


class TranslateError(Exception):
    pass


class EvalError(Exception):
    pass


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: object

    def __repr__(self):
        return "'" + print_sexpr(self.value)


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple

    def __repr__(self):
        return print_sexpr(unparse(self))


@dataclass(frozen=True)
class LamApp:
    formals: tuple
    body: object
    actuals: tuple

    def __repr__(self):
        return print_sexpr(unparse(self))


CONST_T = Const(T)
CONST_NIL = Const(NIL)

# Functions the ground evaluator and the constant folder know how to apply.
BUILTIN_ARITY = {
    "CONS": 2,
    "CAR": 1,
    "CDR": 1,
    "CONSP": 1,
    "ATOM": 1,
    "EQUAL": 2,
    "NOT": 1,
    "LEN": 1,
    "MEMBER-EQUAL": 2,
    "BINARY-APPEND": 2,
    "IFF": 2,
    "IF": 3,
    "HIDE": 1,
}

FOLDABLE = frozenset(BUILTIN_ARITY) - {"IF", "HIDE"}


def truthy(v) -> bool:
    return not is_nil(v)


def sexpr_equal(a, b) -> bool:
    if is_nil(a) and is_nil(b):
        return True
    return a == b


def apply_builtin(name: str, args):
    """Apply one of the builtin functions to SExpr values."""
    if name == "CONS":
        return Pair(args[0], args[1])
    if name == "CAR":
        return args[0].car if isinstance(args[0], Pair) else NIL
    if name == "CDR":
        return args[0].cdr if isinstance(args[0], Pair) else NIL
    if name == "CONSP":
        return T if isinstance(args[0], Pair) else NIL
    if name == "ATOM":
        return NIL if isinstance(args[0], Pair) else T
    if name == "EQUAL":
        return T if sexpr_equal(args[0], args[1]) else NIL
    if name == "NOT":
        return NIL if truthy(args[0]) else T
    if name == "LEN":
        n, cur = 0, args[0]
        while isinstance(cur, Pair):
            n += 1
            cur = cur.cdr
        return n
    if name == "MEMBER-EQUAL":
        x, cur = args[0], args[1]
        while isinstance(cur, Pair):
            if sexpr_equal(cur.car, x):
                return cur
            cur = cur.cdr
        return NIL
    if name == "BINARY-APPEND":
        x, y = args
        items = []
        while isinstance(x, Pair):
            items.append(x.car)
            x = x.cdr
        return from_list(items, y)
    if name == "IFF":
        return T if truthy(args[0]) == truthy(args[1]) else NIL
    if name == "HIDE":
        return args[0]
    raise EvalError(f"not a builtin: {name}")


# ---------------------------------------------------------------------------
# Macros

def _binding_pairs(form, what):
    out = []
    for b in to_list(form):
        items = to_list(b) if isinstance(b, Pair) else None
        if not items or len(items) != 2 or not isinstance(items[0], Symbol):
            raise TranslateError(f"malformed {what} binding: {print_sexpr(b)}")
        out.append((items[0].name, items[1]))
    return out


def _macro_let(form, tr):
    args = to_list(form.cdr)
    if len(args) != 2:
        raise TranslateError("LET expects a binding list and one body form")
    pairs = _binding_pairs(args[0], "LET")
    body = tr(args[1])
    return make_lamapp([n for n, _ in pairs], body, [tr(e) for _, e in pairs])


def _macro_let_star(form, tr):
    args = to_list(form.cdr)
    if len(args) != 2:
        raise TranslateError("LET* expects a binding list and one body form")
    pairs = _binding_pairs(args[0], "LET*")
    out = args[1]
    for name, init in reversed(pairs):
        out = from_list([Symbol("LET"), from_list([from_list([Symbol(name), init])]), out])
    return tr(out)


def _macro_bstar(form, tr):
    args = to_list(form.cdr)
    if len(args) != 2:
        raise TranslateError("B* expects a binder list and one body form")
    binders = to_list(args[0])
    body = args[1]

    def build(i):
        if i == len(binders):
            return body
        b = binders[i]
        items = to_list(b) if isinstance(b, Pair) else None
        if items and len(items) == 2 and isinstance(items[0], Symbol):
            return from_list([Symbol("LET"), from_list([b]), build(i + 1)])
        if items and len(items) == 2 and isinstance(items[0], Pair):
            head = to_list(items[0])
            if len(head) == 2 and head[0] == Symbol("WHEN"):
                return from_list([Symbol("IF"), head[1], items[1], build(i + 1)])
            if len(head) == 2 and head[0] == Symbol("UNLESS"):
                return from_list([Symbol("IF"), head[1], build(i + 1), items[1]])
        raise TranslateError(f"malformed B* binder: {print_sexpr(b)}")

    return tr(build(0))


def _macro_and(form, tr):
    args = to_list(form.cdr)
    if not args:
        return CONST_T
    if len(args) == 1:
        return tr(args[0])
    rest = from_list([Symbol("AND")] + args[1:])
    return App("IF", (tr(args[0]), tr(rest), CONST_NIL))


def _macro_or(form, tr):
    args = to_list(form.cdr)
    if not args:
        return CONST_NIL
    if len(args) == 1:
        return tr(args[0])
    first = tr(args[0])
    rest = from_list([Symbol("OR")] + args[1:])
    return App("IF", (first, first, tr(rest)))


def _macro_cond(form, tr):
    clauses = to_list(form.cdr)
    if not clauses:
        return CONST_NIL
    items = to_list(clauses[0]) if isinstance(clauses[0], Pair) else None
    if not items or len(items) not in (1, 2):
        raise TranslateError(f"malformed COND clause: {print_sexpr(clauses[0])}")
    rest = from_list([Symbol("COND")] + clauses[1:])
    if len(items) == 1:
        return tr(from_list([Symbol("OR"), items[0], rest]))
    return App("IF", (tr(items[0]), tr(items[1]), tr(rest)))


def _macro_implies(form, tr):
    args = to_list(form.cdr)
    if len(args) != 2:
        raise TranslateError("IMPLIES expects two arguments")
    p, q = tr(args[0]), tr(args[1])
    return App("IF", (p, App("IF", (q, CONST_T, CONST_NIL)), CONST_T))


def _macro_quasiquote(form, tr):
    args = to_list(form.cdr)
    if len(args) != 1:
        raise TranslateError("QUASIQUOTE expects one argument")
    return tr(expand_quasiquote(args[0]))


def builtin_macro_env():
    return {
        "LET": _macro_let,
        "LET*": _macro_let_star,
        "B*": _macro_bstar,
        "AND": _macro_and,
        "OR": _macro_or,
        "COND": _macro_cond,
        "IMPLIES": _macro_implies,
        "QUASIQUOTE": _macro_quasiquote,
    }


def expand_quasiquote(form):
    """Rewrite a depth-1 quasiquote template into CONS/BINARY-APPEND/QUOTE forms."""
    if isinstance(form, Pair):
        head = form.car
        if head == QUASIQUOTE:
            raise TranslateError("nested quasiquote is not supported")
        if head == UNQUOTE:
            args = to_list(form.cdr)
            if len(args) != 1:
                raise TranslateError("malformed unquote")
            return args[0]
        if head == UNQUOTE_SPLICING:
            raise TranslateError("unquote-splicing outside list position")
        if isinstance(form.car, Pair) and form.car.car == UNQUOTE_SPLICING:
            args = to_list(form.car.cdr)
            if len(args) != 1:
                raise TranslateError("malformed unquote-splicing")
            return from_list([Symbol("BINARY-APPEND"), args[0], expand_quasiquote(form.cdr)])
        return from_list([Symbol("CONS"), expand_quasiquote(form.car), expand_quasiquote(form.cdr)])
    return from_list([QUOTE, form])


# ---------------------------------------------------------------------------
# Translation

def free_vars(t):
    """Free variable names in left-to-right first-occurrence order."""
    out, seen = [], set()

    def add(name):
        if name not in seen:
            seen.add(name)
            out.append(name)

    def walk(u):
        if isinstance(u, Var):
            add(u.name)
        elif isinstance(u, App):
            for a in u.args:
                walk(a)
        elif isinstance(u, LamApp):
            for a in u.actuals:
                walk(a)
            for name in free_vars(u.body):
                if name not in u.formals:
                    add(name)

    walk(t)
    return out


def make_lamapp(formals, body, actuals):
    """Build a LamApp, closing the body by passing extra free vars through."""
    if len(formals) != len(actuals):
        raise TranslateError("binder/actual count mismatch")
    extras = [n for n in free_vars(body) if n not in formals]
    return LamApp(
        tuple(formals) + tuple(extras),
        body,
        tuple(actuals) + tuple(Var(n) for n in extras),
    )


def translate(form, world, macros=None):
    """Translate a surface form into a Term.

    `world` supplies function arities via world.arity(name); `macros`
    defaults to world.macro_env.
    """
    env = world.macro_env if macros is None else macros

    def tr(f):
        if is_nil(f):
            return CONST_NIL
        if isinstance(f, Symbol):
            if f == T:
                return CONST_T
            return Var(f.name)
        if isinstance(f, (int, str, Keyword)):
            return Const(f)
        if isinstance(f, Pair):
            head = f.car
            if head == QUOTE:
                args = to_list(f.cdr)
                if len(args) != 1:
                    raise TranslateError("malformed quote")
                return Const(args[0])
            if head in (UNQUOTE, UNQUOTE_SPLICING):
                raise TranslateError(f"{print_sexpr(head)} outside quasiquote")
            if isinstance(head, Symbol):
                expander = env.get(head.name)
                if expander is not None:
                    return expander(f, tr)
                return tr_app(head.name, f.cdr)
            if isinstance(head, Pair):
                return tr_lambda(head, f.cdr)
        raise TranslateError(f"cannot translate: {print_sexpr(f)}")

    def tr_app(name, args_form):
        args = [tr(a) for a in to_list(args_form)]
        if name == "APPEND":
            name = "BINARY-APPEND"
        arity = world.arity(name)
        if arity is None:
            raise TranslateError(f"unknown function: {name}")
        if arity != len(args):
            raise TranslateError(f"{name} expects {arity} arguments, got {len(args)}")
        return App(name, tuple(args))

    def tr_lambda(head, args_form):
        items = to_list(head)
        if len(items) != 3 or items[0] != Symbol("LAMBDA"):
            raise TranslateError(f"bad application head: {print_sexpr(head)}")
        formals = []
        for s in to_list(items[1]):
            if not isinstance(s, Symbol):
                raise TranslateError("lambda formals must be symbols")
            formals.append(s.name)
        actuals = [tr(a) for a in to_list(args_form)]
        if len(actuals) != len(formals):
            raise TranslateError("lambda applied to wrong number of arguments")
        return make_lamapp(formals, tr(items[2]), actuals)

    return tr(form)


def unparse(t):
    """Render a Term back into a surface SExpr; constants become QUOTE forms."""
    if isinstance(t, Var):
        return Symbol(t.name)
    if isinstance(t, Const):
        return from_list([QUOTE, t.value])
    if isinstance(t, App):
        return from_list([Symbol(t.fn)] + [unparse(a) for a in t.args])
    if isinstance(t, LamApp):
        lam = from_list([
            Symbol("LAMBDA"),
            from_list([Symbol(n) for n in t.formals]),
            unparse(t.body),
        ])
        return Pair(lam, from_list([unparse(a) for a in t.actuals]))
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Substitution and beta reduction

def substitute(t, subst):
    """Capture-avoiding substitution; descends into HIDE arguments."""
    if not subst:
        return t
    if isinstance(t, Var):
        return subst.get(t.name, t)
    if isinstance(t, Const):
        return t
    if isinstance(t, App):
        return App(t.fn, tuple(substitute(a, subst) for a in t.args))
    if isinstance(t, LamApp):
        inner = {k: v for k, v in subst.items() if k not in t.formals}
        return LamApp(
            t.formals,
            substitute(t.body, inner),
            tuple(substitute(a, subst) for a in t.actuals),
        )
    raise TypeError(f"not a term: {t!r}")


def beta_reduce(t):
    """Bottom-up beta reduction; the result contains no LamApp."""
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, App):
        return App(t.fn, tuple(beta_reduce(a) for a in t.args))
    if isinstance(t, LamApp):
        body = beta_reduce(t.body)
        actuals = [beta_reduce(a) for a in t.actuals]
        return substitute(body, dict(zip(t.formals, actuals)))
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Ground evaluation (test oracle and constant folding backend)

def ground_eval(t, world, fuel: int = 1000):
    """Evaluate a closed term to an SExpr value.

    Definition unfolding is fuel-bounded; stubs and free variables are
    evaluation errors.
    """
    state = [fuel]

    def ev(u, env):
        if isinstance(u, Var):
            if u.name in env:
                return env[u.name]
            raise EvalError(f"unbound variable: {u.name}")
        if isinstance(u, Const):
            return u.value
        if isinstance(u, LamApp):
            vals = [ev(a, env) for a in u.actuals]
            return ev(u.body, dict(zip(u.formals, vals)))
        if isinstance(u, App):
            if u.fn == "IF":
                test = ev(u.args[0], env)
                return ev(u.args[1] if truthy(test) else u.args[2], env)
            args = [ev(a, env) for a in u.args]
            if u.fn in BUILTIN_ARITY:
                return apply_builtin(u.fn, args)
            defn = world.definitions.get(u.fn)
            if defn is None:
                raise EvalError(f"no evaluator for function: {u.fn}")
            if state[0] <= 0:
                raise EvalError("evaluation fuel exhausted")
            state[0] -= 1
            return ev(defn.body, dict(zip(defn.formals, args)))
        raise TypeError(f"not a term: {u!r}")

    return ev(t, {})
