"""Name resolution: decide whether each name is a global, a method local or a
bound parameter, and fix up constructs that need whole-program knowledge."""

from __future__ import annotations

from typing import Optional

from . import ast as A
from .diagnostics import SYNTAX, UNKNOWN_CLASS, ParseError, diag


def _target_ids(t) -> set:
    return {t.id} if isinstance(t, A.Name) else set()


def _tuple_var_ids(pat) -> set:
    if isinstance(pat, A.TuplePat):
        return {e.var.id for e in pat.elems
                if isinstance(e, A.PVar) and isinstance(e.var, A.Name)}
    return set()


def _single_var_id(pat) -> Optional[str]:
    if isinstance(pat, A.PVar) and isinstance(pat.var, A.Name):
        return pat.var.id
    return None


def assigned_names(stmt) -> set:
    """Names that some statement writes: assignment targets, tuple-pattern
    variables of loops and comprehensions, and witness variables."""
    out: set = set()
    for n in A.walk(stmt):
        if isinstance(n, (A.Assign, A.NewObj, A.Compr, A.Aggregate)):
            out |= _target_ids(n.target)
        if isinstance(n, A.Infer):
            for t in n.targets:
                out |= _target_ids(t)
            for q in n.queries:
                out |= _tuple_var_ids(q.pattern)
        if isinstance(n, A.For):
            out |= _tuple_var_ids(n.pattern)
        if isinstance(n, A.Compr):
            for it in n.iters:
                out |= _tuple_var_ids(it.pattern)
        if isinstance(n, (A.IfSome, A.WhileSome)):
            for it in n.iters:
                out |= _tuple_var_ids(it.pattern)
                v = _single_var_id(it.pattern)
                if v:
                    out.add(v)
    return out


class _Resolver:
    def __init__(self, kind: str, params: frozenset = frozenset(), assigned: frozenset = frozenset()):
        self.kind = kind  # top, def, defun
        self.params = params
        self.assigned = assigned
        self.globals_seen: set = set()

    def var_kind(self, ident: str) -> str:
        if self.kind == "def" and ident in self.assigned:
            return "local"
        self.globals_seen.add(ident)
        return "global"

    def name(self, n: A.Name, bound: frozenset) -> A.Name:
        if n.id in bound or n.id in self.params:
            return A.Name(n.id, "param")
        return A.Name(n.id, self.var_kind(n.id))

    def target(self, t, bound):
        if isinstance(t, A.Name):
            if t.id in bound or t.id in self.params:
                raise ParseError([diag(SYNTAX, f"cannot assign to parameter {t.id}")])
            return A.Name(t.id, self.var_kind(t.id))
        return self.expr(t, bound)

    # expressions ---------------------------------------------------------

    def expr(self, e, bound: frozenset):
        if isinstance(e, A.Name):
            return self.name(e, bound)
        if isinstance(e, (A.Lit, A.GlobalObj)):
            return e
        if isinstance(e, A.Field):
            return A.Field(self.expr(e.obj, bound), e.name)
        if isinstance(e, A.TupleExpr):
            return A.TupleExpr(tuple(self.expr(x, bound) for x in e.items))
        if isinstance(e, A.CallExpr):
            return A.CallExpr(self.expr(e.obj, bound), e.method,
                              tuple(self.expr(x, bound) for x in e.args))
        if isinstance(e, A.Unary):
            return A.Unary(e.op, self.expr(e.operand, bound))
        if isinstance(e, A.Binary):
            return A.Binary(e.op, self.expr(e.left, bound), self.expr(e.right, bound))
        if isinstance(e, A.IsInstance):
            return A.IsInstance(self.expr(e.operand, bound), e.cls)
        if isinstance(e, (A.And, A.Or)):
            return type(e)(self.expr(e.left, bound), self.expr(e.right, bound))
        if isinstance(e, (A.Some, A.Each)):
            iters, inner = self.quant_iters(e.iters, bound)
            return type(e)(iters, self.expr(e.cond, inner))
        raise TypeError(f"unexpected expression {e!r}")

    def quant_iters(self, iters, bound):
        # every pattern variable of a quantifier is bound by it
        out = []
        for it in iters:
            src = self.expr(it.source, bound)
            ids = _tuple_var_ids(it.pattern) | {v for v in [_single_var_id(it.pattern)] if v}
            pat = self.pattern(it.pattern, bound, bound | ids)
            bound = bound | ids
            out.append(A.Iter(pat, src))
        return tuple(out), bound

    def pattern(self, pat, read_bound, bind_bound, as_var=False):
        """Resolve a pattern.  Plain variables become parameters if they are in
        ``bind_bound``; otherwise (``as_var``) they are assignable variables."""
        if isinstance(pat, A.PVar):
            v = pat.var
            if isinstance(v, A.Name):
                if not as_var and v.id in bind_bound:
                    return A.PVar(A.Name(v.id, "param"))
                return A.PVar(self.target(v, read_bound))
            return A.PVar(self.expr(v, read_bound))
        if isinstance(pat, A.PEq):
            return A.PEq(self.expr(pat.var, read_bound))
        if isinstance(pat, A.PExpr):
            return A.PExpr(self.expr(pat.expr, read_bound))
        if isinstance(pat, A.PWild):
            return pat
        if isinstance(pat, A.TuplePat):
            return A.TuplePat(tuple(self.pattern(e, read_bound, bind_bound, as_var)
                                    for e in pat.elems))
        raise TypeError(f"unexpected pattern {pat!r}")

    def loop_iters(self, iters, bound):
        """Iterators of comprehensions: single variables are bound, tuple
        components are variables."""
        out = []
        for it in iters:
            src = self.expr(it.source, bound)
            single = _single_var_id(it.pattern)
            if single is not None:
                bound = bound | {single}
                pat = A.PVar(A.Name(single, "param"))
            else:
                pat = self.pattern(it.pattern, bound, frozenset(), as_var=True)
            out.append(A.Iter(pat, src))
        return tuple(out), bound

    # statements ----------------------------------------------------------

    def stmt(self, s, bound: frozenset = frozenset()):
        if isinstance(s, A.Skip):
            return s
        if isinstance(s, A.Seq):
            return A.Seq(tuple(self.stmt(x, bound) for x in s.stmts), s.loc)
        if isinstance(s, A.Assign):
            return A.Assign(self.target(s.target, bound), self.expr(s.value, bound), s.loc)
        if isinstance(s, A.NewObj):
            return A.NewObj(self.target(s.target, bound), s.cls, s.loc)
        if isinstance(s, A.Aggregate):
            return A.Aggregate(self.target(s.target, bound), s.op, self.expr(s.source, bound), s.loc)
        if isinstance(s, A.Compr):
            target = self.target(s.target, bound)
            iters, inner = self.loop_iters(s.iters, bound)
            return A.Compr(target, self.expr(s.elem, inner), iters, self.expr(s.cond, inner), s.loc)
        if isinstance(s, A.If):
            return A.If(self.expr(s.cond, bound), self.stmt(s.then, bound),
                        self.stmt(s.orelse, bound), s.loc)
        if isinstance(s, A.While):
            return A.While(self.expr(s.cond, bound), self.stmt(s.body, bound), s.loc)
        if isinstance(s, A.For):
            src = self.expr(s.source, bound)
            single = _single_var_id(s.pattern)
            if single is not None and single not in self.assigned_here():
                inner = bound | {single}
                pat = A.PVar(A.Name(single, "param"))
            else:
                inner = bound
                pat = self.pattern(s.pattern, bound, frozenset(), as_var=True)
            return A.For(pat, src, self.stmt(s.body, inner), s.loc)
        if isinstance(s, (A.IfSome, A.WhileSome)):
            iters = []
            for it in s.iters:
                iters.append(A.Iter(self.pattern(it.pattern, bound, frozenset(), as_var=True),
                                    self.expr(it.source, bound)))
            return type(s)(tuple(iters), self.expr(s.cond, bound), self.stmt(s.body, bound), s.loc)
        if isinstance(s, A.MethodCall):
            return A.MethodCall(self.expr(s.obj, bound), s.method,
                                tuple(self.expr(a, bound) for a in s.args), s.loc)
        if isinstance(s, A.SuperCall):
            return A.SuperCall(s.cls, s.method, tuple(self.expr(a, bound) for a in s.args), s.loc)
        if isinstance(s, A.Infer):
            targets = tuple(self.target(t, bound) for t in s.targets)
            obj = None if s.obj is None else self.expr(s.obj, bound)
            queries = tuple(A.Query(q.pred, None if q.pattern is None else
                                    self.pattern(q.pattern, bound, frozenset(), as_var=True))
                            for q in s.queries)
            kwargs = tuple((k, self.expr(v, bound)) for k, v in s.kwargs)
            return A.Infer(targets, obj, queries, kwargs, s.ruleset, s.loc)
        raise TypeError(f"unexpected statement {s!r}")

    def assigned_here(self):
        return self.assigned


def _top_resolver(main) -> _Resolver:
    return _Resolver("top", frozenset(), frozenset(assigned_names(main)))


class _TopResolver(_Resolver):
    def var_kind(self, ident):
        self.globals_seen.add(ident)
        return "global"


def resolve_program(prog: A.Program, declared_globals=(), extra_globals=()) -> tuple:
    """Resolve names and return (program, global variable names)."""
    classes = {c.name: c for c in prog.classes}
    globals_seen: set = set(declared_globals) | set(extra_globals)

    top = _TopResolver("top", frozenset(), frozenset(assigned_names(prog.main)))
    main = top.stmt(prog.main)
    globals_seen |= top.globals_seen

    new_classes = []
    for c in prog.classes:
        methods = []
        for m in c.methods:
            params = frozenset(m.params) | {"self"}
            if m.is_function:
                r = _Resolver("defun", params)
                body = r.expr(m.body, frozenset())
            else:
                r = _Resolver("def", params, frozenset(assigned_names(m.body) - params))
                body = r.stmt(m.body)
                body = _fix_infer_receivers(body, c.name, classes)
            globals_seen |= r.globals_seen
            methods.append(A.Method(m.name, m.params, body, m.is_function, m.loc))
        new_classes.append(A.ClassDecl(c.name, c.parent, c.rulesets, tuple(methods), c.loc))

    def fix_rs(rs: A.RuleSetDecl) -> A.RuleSetDecl:
        def pred(p):
            if isinstance(p, A.ParamPred) and p.name in globals_seen:
                return A.GlobalPred(p.name)
            return p

        def atom(a):
            return A.Atom(pred(a.pred), a.args)
        rules = tuple(A.Rule(atom(r.head), tuple(A.Literal(atom(l.atom), l.negated) for l in r.body),
                             r.loc) for r in rs.rules)
        return A.RuleSetDecl(rs.name, rules, rs.loc)

    new_classes = [A.ClassDecl(c.name, c.parent, tuple(fix_rs(r) for r in c.rulesets),
                               c.methods, c.loc) for c in new_classes]
    out = A.Program(tuple(fix_rs(r) for r in prog.rulesets), tuple(new_classes), main)
    out = _fix_setup_calls(out)
    return out, frozenset(globals_seen)


def class_chain(cls: str, classes: dict) -> list:
    out = []
    seen = set()
    while cls in classes and cls not in seen:
        seen.add(cls)
        out.append(classes[cls])
        cls = classes[cls].parent
    return out


def _fix_infer_receivers(body, cls, classes):
    """A bare infer inside a method names a rule set of the receiver's class
    when one with that name exists there."""
    names = {rs.name for c in class_chain(cls, classes) for rs in c.rulesets}

    def fix(s):
        if isinstance(s, A.Infer) and s.obj is None and s.ruleset in names:
            return A.Infer(s.targets, A.Name("self", "param"), s.queries, s.kwargs, s.ruleset, s.loc)
        return s
    return map_statements(body, fix)


def _fix_setup_calls(prog: A.Program) -> A.Program:
    classes = {c.name: c for c in prog.classes}

    def has_setup(cls):
        return any(m.name == "setup" for c in class_chain(cls, classes) for m in c.methods)

    def fix(s):
        if isinstance(s, A.MethodCall) and s.method.startswith("$setup:"):
            cls = s.method.split(":", 1)[1]
            if cls in classes and has_setup(cls):
                return A.MethodCall(s.obj, "setup", s.args, s.loc)
            if s.args:
                loc = s.loc or (None, None)
                raise ParseError([diag(UNKNOWN_CLASS if cls not in classes and cls not in A.BUILTIN_CLASSES
                                       else SYNTAX,
                                       f"class {cls} has no setup method to receive arguments", loc)])
            return A.Skip(s.loc)
        return s

    def fix_method(m):
        if m.is_function:
            return m
        return A.Method(m.name, m.params, map_statements(m.body, fix), m.is_function, m.loc)

    return A.Program(prog.rulesets,
                     tuple(A.ClassDecl(c.name, c.parent, c.rulesets,
                                       tuple(fix_method(m) for m in c.methods), c.loc)
                           for c in prog.classes),
                     map_statements(prog.main, fix))


def map_statements(stmt, fn):
    """Bottom-up rewrite of every statement node; sequences are re-flattened."""
    if isinstance(stmt, A.Seq):
        return A.seq(*(map_statements(s, fn) for s in stmt.stmts))
    if isinstance(stmt, A.If):
        stmt = A.If(stmt.cond, map_statements(stmt.then, fn), map_statements(stmt.orelse, fn), stmt.loc)
    elif isinstance(stmt, A.While):
        stmt = A.While(stmt.cond, map_statements(stmt.body, fn), stmt.loc)
    elif isinstance(stmt, A.For):
        stmt = A.For(stmt.pattern, stmt.source, map_statements(stmt.body, fn), stmt.loc)
    elif isinstance(stmt, (A.IfSome, A.WhileSome)):
        stmt = type(stmt)(stmt.iters, stmt.cond, map_statements(stmt.body, fn), stmt.loc)
    return fn(stmt)
