"""Static elimination of derived constructs.

Each pass rewrites the resolved AST toward the core language that the
runtime executes.  ``desugar_all`` applies them in a fixed order:
bool, globals, patterns, infer patterns, ifSome/whileSome, comprehensions
(with aggregates), iterator tuples.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace
from typing import Any, Callable, Dict, List, Optional

from .syntax import ast as A
from .values import FALSE, TRUE

FRESH_PREFIX = "$t"
_FRESH_RE = re.compile(r"^\$t(\d+)$")


# ------------------------------------------------------------------ helpers

@dataclass
class FreshNamer:
    counter: int = 0
    prefix: str = FRESH_PREFIX

    def fresh(self) -> str:
        self.counter += 1
        return f"{self.prefix}{self.counter}"

    def local(self) -> A.Name:
        return A.Name(self.fresh(), "local")

    def param(self) -> A.Name:
        return A.Name(self.fresh(), "param")

    @classmethod
    def for_program(cls, prog: A.Program) -> "FreshNamer":
        """A namer whose names are above every ``$t<N>`` already present."""
        top = 0
        for node in _all_nodes(prog):
            if isinstance(node, A.Name):
                m = _FRESH_RE.match(node.id)
                if m:
                    top = max(top, int(m.group(1)))
        return cls(top)


def _all_nodes(prog: A.Program):
    yield from A.walk(prog.main)
    for c in prog.classes:
        for m in c.methods:
            yield from A.walk(m.body)


def _is_node(v) -> bool:
    return hasattr(v, "__dataclass_fields__")


def _map_value(v, fn):
    if isinstance(v, tuple):
        items = tuple(_map_value(x, fn) for x in v)
        return v if all(a is b for a, b in zip(items, v)) else items
    if _is_node(v):
        return fn(v)
    return v


def map_children(node, fn):
    changes = {}
    for f in fields(node):
        v = getattr(node, f.name)
        nv = _map_value(v, fn)
        if nv is not v:
            changes[f.name] = nv
    return replace(node, **changes) if changes else node


def transform(node, fn):
    """Post-order rewrite of every node below and including ``node``."""
    return fn(map_children(node, lambda c: transform(c, fn)))


def neg(e):
    return A.Unary("not", e)


def conj(*es):
    """Conjunction written with the core's ``not``/``or`` only."""
    es = [e for e in es if e is not None]
    if not es:
        return A.Lit(TRUE)
    out = es[-1]
    for e in reversed(es[:-1]):
        out = neg(A.Or(neg(e), neg(out)))
    return out


def is_(a, b):
    return A.Binary("is", a, b)


def select(x, i: int):
    return A.Binary("select", x, A.Lit(i))


def tuple_expr(items):
    items = tuple(items)
    return items[0] if len(items) == 1 else A.TupleExpr(items)


def _var_key(e) -> bool:
    return isinstance(e, (A.Name, A.Field))


def _pattern_vars(pat) -> list:
    """Unprefixed variables of a pattern, in order."""
    if isinstance(pat, A.PVar):
        return [pat.var]
    if isinstance(pat, A.TuplePat):
        return [e.var for e in pat.elems if isinstance(e, A.PVar)]
    return []


def subst(e, mapping: Dict[Any, Any]):
    """Replace variables (Name or Field nodes) in an expression, statement or
    pattern.  Quantifier bindings shadow the mapping."""
    if not mapping:
        return e
    if _var_key(e) and e in mapping:
        return mapping[e]
    if isinstance(e, A.Some) or isinstance(e, A.Each):
        m = dict(mapping)
        iters = []
        for it in e.iters:
            src = subst(it.source, m)
            pat = _subst_pattern(it.pattern, m)
            for v in _pattern_vars(it.pattern):
                m.pop(v, None)
            iters.append(A.Iter(pat, src))
        return type(e)(tuple(iters), subst(e.cond, m))
    if isinstance(e, (A.PVar, A.PEq, A.PExpr, A.TuplePat, A.PWild)):
        return _subst_pattern(e, mapping)
    if _is_node(e):
        return map_children(e, lambda c: subst(c, mapping))
    return e


def _subst_pattern(pat, mapping):
    if isinstance(pat, A.PVar):
        return pat  # binding occurrence
    if isinstance(pat, A.PEq):
        new = subst(pat.var, mapping)
        return A.PEq(new) if _var_key(new) else A.PExpr(new)
    if isinstance(pat, A.PExpr):
        return A.PExpr(subst(pat.expr, mapping))
    if isinstance(pat, A.TuplePat):
        return A.TuplePat(tuple(_subst_pattern(x, mapping) for x in pat.elems))
    return pat


def free_vars(e) -> set:
    """Names and fields read by an expression, excluding quantifier-bound ones."""
    out: set = set()

    def go(x, bound):
        if isinstance(x, A.Name):
            if x not in bound:
                out.add(x)
            return
        if isinstance(x, A.Field):
            if x not in bound:
                out.add(x)
            go(x.obj, bound)
            return
        if isinstance(x, (A.Some, A.Each)):
            b = set(bound)
            for it in x.iters:
                go(it.source, b)
                _pat_reads(it.pattern, b)
                b |= set(_pattern_vars(it.pattern))
            go(x.cond, b)
            return
        if _is_node(x):
            for c in A.children(x):
                go(c, bound)

    def _pat_reads(p, bound):
        if isinstance(p, A.PEq):
            go(p.var, bound)
        elif isinstance(p, A.PExpr):
            go(p.expr, bound)
        elif isinstance(p, A.TuplePat):
            for q in p.elems:
                _pat_reads(q, bound)

    go(e, set())
    return out


# ---------------------------------------------------------- program walking

def _map_program(prog: A.Program, stmt_fn: Callable, expr_fn: Optional[Callable] = None,
                 rule_fn: Optional[Callable] = None) -> A.Program:
    def method(m: A.Method) -> A.Method:
        if m.is_function:
            return replace(m, body=expr_fn(m.body) if expr_fn else m.body)
        return replace(m, body=stmt_fn(m.body))

    def ruleset(rs):
        return rule_fn(rs) if rule_fn else rs

    classes = tuple(replace(c, rulesets=tuple(ruleset(r) for r in c.rulesets),
                            methods=tuple(method(m) for m in c.methods))
                    for c in prog.classes)
    return A.Program(tuple(ruleset(r) for r in prog.rulesets), classes, stmt_fn(prog.main))


def _stmt_post(fn: Callable) -> Callable:
    """Apply ``fn`` to every statement bottom-up; sequences are flattened."""

    def go(s):
        s = map_children(s, lambda c: go(c) if isinstance(c, A.STATEMENT_TYPES) else c)
        if isinstance(s, A.Seq):
            return A.seq(*s.stmts)
        return fn(s)

    return go


def _expr_everywhere(fn: Callable) -> Callable:
    """Post-order rewrite of every non-statement node (expressions, patterns)."""

    def go(node):
        if _is_node(node) and not isinstance(node, A.STATEMENT_TYPES):
            return transform(node, fn)
        return map_children(node, go)

    return go


# ------------------------------------------------------------------- passes

def desugar_bool(prog: A.Program) -> A.Program:
    def fn(e):
        if isinstance(e, A.And):
            return neg(A.Or(neg(e.left), neg(e.right)))
        if isinstance(e, A.Each):
            return neg(A.Some(e.iters, neg(e.cond)))
        return e

    go = _expr_everywhere(fn)
    return _map_program(prog, go, go)


def desugar_globals(prog: A.Program) -> A.Program:
    def fn(e):
        if isinstance(e, A.Name) and e.kind == "global":
            return A.Field(A.GlobalObj(), e.id)
        return e

    def rule_fn(rs: A.RuleSetDecl) -> A.RuleSetDecl:
        def pred(p):
            return A.FieldPred("gv", p.name) if isinstance(p, A.GlobalPred) else p

        def atom(a):
            return A.Atom(pred(a.pred), a.args)

        return replace(rs, rules=tuple(
            A.Rule(atom(r.head), tuple(A.Literal(atom(l.atom), l.negated) for l in r.body), r.loc)
            for r in rs.rules))

    go = _expr_everywhere(fn)
    return _map_program(prog, go, go, rule_fn)


def _iters_of(s):
    if isinstance(s, (A.Compr, A.IfSome, A.WhileSome)):
        return s.iters
    if isinstance(s, A.For):
        return (A.Iter(s.pattern, s.source),)
    return ()


def _with_iters(s, iters):
    if isinstance(s, A.For):
        return replace(s, pattern=iters[0].pattern, source=iters[0].source)
    return replace(s, iters=tuple(iters))


def desugar_patterns(prog: A.Program, namer: FreshNamer) -> A.Program:
    """Hoist non-variable tuple-pattern components into fresh ``=v`` variables
    and replace wildcards outside queries with fresh variables."""

    def elems(pat, bound, prelude, in_query):
        out = []
        for e in pat.elems:
            if isinstance(e, A.PExpr):
                if free_vars(e.expr) & bound:
                    out.append(e)  # refers to a variable bound by this construct
                else:
                    v = namer.local()
                    prelude.append(A.Assign(v, e.expr))
                    out.append(A.PEq(v))
            elif isinstance(e, A.PWild) and not in_query:
                out.append(A.PVar(namer.local()))
            else:
                out.append(e)
        return A.TuplePat(tuple(out))

    def fn(s):
        prelude: List[Any] = []
        if isinstance(s, A.Infer):
            qs = tuple(A.Query(q.pred, None if q.pattern is None
                               else elems(q.pattern, set(), prelude, True)) for q in s.queries)
            s = replace(s, queries=qs)
        else:
            iters = _iters_of(s)
            if iters:
                bound: set = set()
                out = []
                for it in iters:
                    pat = it.pattern
                    if isinstance(pat, A.TuplePat):
                        pat = elems(pat, bound, prelude, False)
                    elif isinstance(pat, A.PWild):
                        assigned = isinstance(s, (A.IfSome, A.WhileSome))
                        pat = A.PVar(namer.local() if assigned else namer.param())
                    bound |= set(_pattern_vars(pat))
                    out.append(A.Iter(pat, it.source))
                s = _with_iters(s, out)
        return A.seq(*prelude, s) if prelude else s

    def expr_fn(e):
        # wildcards in quantifier patterns become fresh bound variables
        if isinstance(e, A.Some):
            iters = []
            for it in e.iters:
                pat = it.pattern
                if isinstance(pat, A.PWild):
                    pat = A.PVar(namer.param())
                elif isinstance(pat, A.TuplePat):
                    pat = A.TuplePat(tuple(A.PVar(namer.param()) if isinstance(x, A.PWild) else x
                                           for x in pat.elems))
                iters.append(A.Iter(pat, it.source))
            return A.Some(tuple(iters), e.cond)
        return e

    ex = _expr_everywhere(expr_fn)
    st = _stmt_post(fn)
    return _map_program(prog, lambda s: st(ex(s)), ex)


def desugar_infer(prog: A.Program, namer: FreshNamer) -> A.Program:
    def fn(s):
        if not isinstance(s, A.Infer) or all(q.pattern is None for q in s.queries):
            return s
        ys = [namer.local() for _ in s.queries]
        call = A.Infer(tuple(ys), s.obj, tuple(A.Query(q.pred) for q in s.queries),
                       s.kwargs, s.ruleset, s.loc)
        out = [call]
        for target, q, y in zip(s.targets, s.queries, ys):
            if q.pattern is None:
                out.append(A.Assign(target, y, s.loc))
                continue
            pat = A.TuplePat(tuple(A.PVar(namer.local()) if isinstance(e, A.PWild) else e
                                   for e in q.pattern.elems))
            proj = tuple(e.var for e in pat.elems if isinstance(e, A.PVar))
            elem = A.TupleExpr(()) if not proj else tuple_expr(proj)
            out.append(A.Compr(target, elem, (A.Iter(pat, y),), A.Lit(TRUE), s.loc))
        return A.seq(*out)

    st = _stmt_post(fn)
    return _map_program(prog, st, lambda e: e)


def _rename_witnesses(iters, namer):
    """Fresh primed copies of the unprefixed pattern variables (θ)."""
    theta: Dict[Any, Any] = {}
    for it in iters:
        for v in _pattern_vars(it.pattern):
            if v not in theta:
                theta[v] = namer.local() if isinstance(it.pattern, A.TuplePat) else namer.param()
    return theta


def _some_loop(iters, cond, body, found, theta):
    """Nested ``for pat' in e`` loops guarded by ``b' and not foundOne``."""
    assigns = [A.Assign(v, theta[v]) for v in theta]
    inner = A.If(conj(subst(cond, theta), neg(found)),
                 A.seq(*assigns, body, A.Assign(found, A.Lit(TRUE))), A.Skip())
    loop = inner
    for it in reversed(iters):
        pat = it.pattern
        if isinstance(pat, A.PVar):
            pat = A.PVar(theta[pat.var])
        else:
            pat = A.TuplePat(tuple(A.PVar(theta[e.var]) if isinstance(e, A.PVar) else e
                                   for e in _subst_pattern(pat, theta).elems))
        loop = A.For(pat, subst(it.source, theta), loop)
    return loop


def desugar_some_statements(prog: A.Program, namer: FreshNamer) -> A.Program:
    def fn(s):
        if isinstance(s, A.IfSome):
            found = namer.local()
            theta = _rename_witnesses(s.iters, namer)
            return A.seq(A.Assign(found, A.Lit(FALSE), s.loc),
                         _some_loop(s.iters, s.cond, s.body, found, theta))
        if isinstance(s, A.WhileSome):
            found = namer.local()
            theta = _rename_witnesses(s.iters, namer)
            body = A.seq(A.Assign(found, A.Lit(FALSE)),
                         _some_loop(s.iters, s.cond, s.body, found, theta))
            return A.seq(A.Assign(found, A.Lit(TRUE), s.loc), A.While(found, body, s.loc))
        return s

    st = _stmt_post(fn)
    return _map_program(prog, st, lambda e: e)


def _mentions(node, target) -> bool:
    return any(n == target for n in A.walk(node))


def _aggregate(s: A.Aggregate, namer: FreshNamer):
    acc, x = namer.local(), namer.param()
    if s.op == "count":
        init, step = A.Lit(0), A.Assign(acc, A.Binary("plus", acc, A.Lit(1)))
    elif s.op == "sum":
        init, step = A.Lit(0), A.Assign(acc, A.Binary("plus", acc, x))
    else:
        better = A.Binary("lt", x, acc) if s.op == "min" else A.Binary("lt", acc, x)
        init = A.Lit(None)
        step = A.If(A.Or(is_(acc, A.Lit(None)), better), A.Assign(acc, x), A.Skip())
    return A.seq(A.Assign(acc, init, s.loc), A.For(A.PVar(x), s.source, step, s.loc),
                 A.Assign(s.target, acc, s.loc))


def desugar_comprehensions(prog: A.Program, namer: FreshNamer) -> A.Program:
    def fn(s):
        if isinstance(s, A.Aggregate):
            return _aggregate(s, namer)
        if not isinstance(s, A.Compr):
            return s
        extra = []
        iters = []
        for it in s.iters:
            pat = it.pattern
            if isinstance(pat, A.PEq):
                y = namer.param()
                extra.append(is_(y, pat.var))
                pat = A.PVar(y)
            elif isinstance(pat, A.TuplePat):
                elems = []
                for e in pat.elems:
                    if isinstance(e, A.PEq):
                        y = namer.local()
                        extra.append(is_(y, e.var))
                        elems.append(A.PVar(y))
                    else:
                        elems.append(e)
                pat = A.TuplePat(tuple(elems))
            iters.append(A.Iter(pat, it.source))
        cond = s.cond
        if extra:
            cond = conj(*extra) if cond == A.Lit(TRUE) else conj(cond, *extra)
        # build into a temporary when the target is read by the comprehension
        clash = any(_mentions(x, s.target) for x in [s.elem, cond] + [i.source for i in iters]
                    + [i.pattern for i in iters])
        target = namer.local() if clash else s.target
        body = A.If(cond, A.MethodCall(target, "add", (s.elem,)), A.Skip())
        for it in reversed(iters):
            body = A.For(it.pattern, it.source, body, s.loc)
        out = [A.NewObj(target, "set", s.loc), body]
        if clash:
            out.append(A.Assign(s.target, target, s.loc))
        return A.seq(*out)

    st = _stmt_post(fn)
    return _map_program(prog, st, lambda e: e)


def _tuple_filter(x, pat: A.TuplePat):
    n = len(pat.elems)
    js, vals = [], []
    for j, e in enumerate(pat.elems, start=1):
        if isinstance(e, A.PEq):
            js.append(j)
            vals.append(e.var)
        elif isinstance(e, A.PExpr):
            js.append(j)
            vals.append(e.expr)
    parts = [A.Unary("isTuple", x), is_(A.Unary("len", x), A.Lit(n))]
    if js:
        parts.append(is_(A.TupleExpr(tuple(select(x, j) for j in js)), A.TupleExpr(tuple(vals))))
    return parts


def _some_expr(e: A.Some, namer: FreshNamer):
    if len(e.iters) > 1:
        e = A.Some(e.iters[:1], A.Some(e.iters[1:], e.cond))
    it = e.iters[0]
    pat = it.pattern
    if isinstance(pat, A.PEq):
        y = namer.param()
        return A.Some((A.Iter(A.PVar(y), it.source),), conj(is_(y, pat.var), _some_inner(e.cond, namer)))
    if not isinstance(pat, A.TuplePat):
        return A.Some((it,), _some_inner(e.cond, namer))
    x = namer.param()
    theta = {}
    for i, el in enumerate(pat.elems, start=1):
        if isinstance(el, A.PVar) and el.var not in theta:
            theta[el.var] = select(x, i)
    cond = _some_inner(subst(e.cond, theta), namer)
    return A.Some((A.Iter(A.PVar(x), it.source),), conj(*_tuple_filter(x, pat), cond))


def _some_inner(e, namer):
    """Rewrite quantifiers top-down so outer substitutions reach inner patterns."""
    if isinstance(e, A.Some):
        return _some_expr(A.Some(tuple(A.Iter(i.pattern, _some_inner(i.source, namer))
                                       for i in e.iters), e.cond), namer)
    if _is_node(e) and not isinstance(e, A.STATEMENT_TYPES):
        return map_children(e, lambda c: _some_inner(c, namer))
    return e


def desugar_iterator_tuples(prog: A.Program, namer: FreshNamer) -> A.Program:
    def for_stmt(s):
        if not isinstance(s, A.For):
            return s
        pat = s.pattern
        if isinstance(pat, A.PEq):
            y = namer.param()
            return A.For(A.PVar(y), s.source, A.If(is_(y, pat.var), s.body, A.Skip()), s.loc)
        if not isinstance(pat, A.TuplePat):
            return s
        S, S2, x = namer.local(), namer.local(), namer.param()
        filt = conj(*_tuple_filter(x, pat))
        assigns = [A.Assign(e.var, select(x, i)) for i, e in enumerate(pat.elems, start=1)
                   if isinstance(e, A.PVar)]
        set_branch = A.seq(
            A.NewObj(S2, "set"),
            A.For(A.PVar(x), S, A.If(filt, A.MethodCall(S2, "add", (x,)), A.Skip())),
            A.For(A.PVar(x), S2, A.seq(*assigns, s.body)))
        seq_branch = A.For(A.PVar(x), S, A.If(filt, A.seq(*assigns, s.body), A.Skip()))
        return A.seq(A.Assign(S, s.source, s.loc),
                     A.If(A.IsInstance(S, "set"), set_branch, seq_branch, s.loc))

    def exprs(node):
        if _is_node(node) and not isinstance(node, A.STATEMENT_TYPES):
            return _some_inner(node, namer)
        return map_children(node, exprs)

    st = _stmt_post(for_stmt)
    return _map_program(prog, lambda s: st(exprs(s)), lambda e: _some_inner(e, namer))


def desugar_all(prog: A.Program, namer: Optional[FreshNamer] = None) -> A.Program:
    namer = namer or FreshNamer.for_program(prog)
    prog = desugar_bool(prog)
    prog = desugar_globals(prog)
    prog = desugar_patterns(prog, namer)
    prog = desugar_infer(prog, namer)
    prog = desugar_some_statements(prog, namer)
    prog = desugar_comprehensions(prog, namer)
    prog = desugar_iterator_tuples(prog, namer)
    return prog


# ------------------------------------------------------------ absence scan

def residual_sugar(prog: A.Program) -> list:
    """Every node of an eliminated form still present in ``prog``."""
    out = []
    for rs in list(prog.rulesets) + [r for c in prog.classes for r in c.rulesets]:
        for r in rs.rules:
            for a in [r.head] + [l.atom for l in r.body]:
                if isinstance(a.pred, A.GlobalPred):
                    out.append(a.pred)
    for n in _all_nodes(prog):
        if isinstance(n, (A.And, A.Each, A.IfSome, A.WhileSome, A.Compr, A.Aggregate,
                          A.PWild, A.PExpr, A.PEq, A.TuplePat)):
            out.append(n)
        elif isinstance(n, A.Name) and n.kind == "global":
            out.append(n)
        elif isinstance(n, A.Some) and (len(n.iters) != 1 or not isinstance(n.iters[0].pattern, A.PVar)):
            out.append(n)
        elif isinstance(n, A.For) and not isinstance(n.pattern, A.PVar):
            out.append(n)
        elif isinstance(n, A.Infer) and any(q.pattern is not None for q in n.queries):
            out.append(n)
    return out
