"""Pretty-printer producing concrete syntax.

Operators are printed in prefix form (``plus(a,b)``, ``is(a,b)``) and boolean
connectives are fully parenthesized, so the output of a parsed program
parses back to an equal AST.
"""

from __future__ import annotations

from typing import List

from . import ast as A
from ..values import Addr, format_value

INDENT = "  "


def expr(e) -> str:
    if isinstance(e, A.Lit):
        return format_value(e.value)
    if isinstance(e, A.Name):
        return e.id
    if isinstance(e, A.GlobalObj):
        return "a_gv"
    if isinstance(e, Addr):
        return repr(e)
    if isinstance(e, A.Field):
        return f"{expr(e.obj)}.{e.name}"
    if isinstance(e, A.TupleExpr):
        if len(e.items) == 1:
            return f"({expr(e.items[0])},)"
        return "(" + ", ".join(expr(x) for x in e.items) + ")"
    if isinstance(e, A.CallExpr):
        return f"{expr(e.obj)}.{e.method}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, A.Unary):
        if e.op == "not":
            return f"(not {expr(e.operand)})"
        if e.op == "neg":
            return f"(-{expr(e.operand)})"
        return f"{e.op}({expr(e.operand)})"
    if isinstance(e, A.Binary):
        return f"{e.op}({expr(e.left)}, {expr(e.right)})"
    if isinstance(e, A.IsInstance):
        return f"isinstance({expr(e.operand)}, {e.cls})"
    if isinstance(e, A.And):
        return f"({expr(e.left)} and {expr(e.right)})"
    if isinstance(e, A.Or):
        return f"({expr(e.left)} or {expr(e.right)})"
    if isinstance(e, (A.Some, A.Each)):
        kw = "some" if isinstance(e, A.Some) else "each"
        return f"({kw} {iters(e.iters)} | {expr(e.cond)})"
    if isinstance(e, tuple):  # a runtime tuple value substituted into code
        return format_value(e)
    return format_value(e)


def pattern(p) -> str:
    if isinstance(p, A.PVar):
        return expr(p.var)
    if isinstance(p, A.PEq):
        return "=" + expr(p.var)
    if isinstance(p, A.PWild):
        return "_"
    if isinstance(p, A.PExpr):
        return expr(p.expr)
    if isinstance(p, A.TuplePat):
        if len(p.elems) == 1:
            return f"({pattern(p.elems[0])},)"
        return "(" + ", ".join(pattern(x) for x in p.elems) + ")"
    raise TypeError(p)


def iters(its) -> str:
    return ", ".join(f"{pattern(it.pattern)} in {expr(it.source)}" for it in its)


def _block(s, depth) -> str:
    inner = stmt_lines(s, depth + 1)
    return "{\n" + "\n".join(inner) + "\n" + INDENT * depth + "}"


def stmt_lines(s, depth: int = 0) -> List[str]:
    pad = INDENT * depth
    if isinstance(s, A.Seq):
        out: List[str] = []
        for x in s.stmts:
            out.extend(stmt_lines(x, depth))
        return out
    return [pad + stmt(s, depth) + ";"]


def stmt(s, depth: int = 0) -> str:
    if isinstance(s, A.Skip):
        return "skip"
    if isinstance(s, A.Assign):
        return f"{expr(s.target)} := {expr(s.value)}"
    if isinstance(s, A.NewObj):
        return f"{expr(s.target)} := new {s.cls}"
    if isinstance(s, A.Compr):
        return f"{expr(s.target)} := {{{expr(s.elem)} : {iters(s.iters)} | {expr(s.cond)}}}"
    if isinstance(s, A.Aggregate):
        return f"{expr(s.target)} := {s.op}({expr(s.source)})"
    if isinstance(s, A.If):
        text = f"if {expr(s.cond)} {_block(s.then, depth)}"
        if not isinstance(s.orelse, A.Skip):
            text += f" else {_block(s.orelse, depth)}"
        return text
    if isinstance(s, A.For):
        return f"for {pattern(s.pattern)} in {expr(s.source)} {_block(s.body, depth)}"
    if isinstance(s, A.ForInTuple):
        return f"for {pattern(s.pattern)} inTuple {format_value(s.values)} {_block(s.body, depth)}"
    if isinstance(s, A.While):
        return f"while {expr(s.cond)} {_block(s.body, depth)}"
    if isinstance(s, A.IfSome):
        return f"if some {iters(s.iters)} | {expr(s.cond)} {_block(s.body, depth)}"
    if isinstance(s, A.WhileSome):
        return f"while some {iters(s.iters)} | {expr(s.cond)} {_block(s.body, depth)}"
    if isinstance(s, A.MethodCall):
        return f"{expr(s.obj)}.{s.method}({', '.join(expr(a) for a in s.args)})"
    if isinstance(s, A.SuperCall):
        return f"super.{s.method}({', '.join(expr(a) for a in s.args)})"
    if isinstance(s, A.Infer):
        args = [query(q) for q in s.queries]
        args += [f"{k}={expr(v)}" for k, v in s.kwargs]
        args.append(f"rules={s.ruleset}")
        call = ("" if s.obj is None else expr(s.obj) + ".") + f"infer({', '.join(args)})"
        if not s.targets:
            return call
        return f"{', '.join(expr(t) for t in s.targets)} := {call}"
    if isinstance(s, A.Return):
        return "return"
    raise TypeError(f"cannot print {s!r}")


def query(q: A.Query) -> str:
    return q.pred if q.pattern is None else q.pred + pattern(q.pattern)


def _term(t) -> str:
    if isinstance(t, A.LogicVar):
        if t.name.startswith("_") and t.name[1:].isdigit():
            return "_"
        return t.name
    return format_value(t.value)


def atom(a: A.Atom) -> str:
    return f"{a.pred}({', '.join(_term(x) for x in a.args)})"


def rule(r: A.Rule) -> str:
    if not r.body:
        return atom(r.head)
    hyps = ", ".join(("not " if l.negated else "") + atom(l.atom) for l in r.body)
    return f"{atom(r.head)} if {hyps}"


def ruleset_lines(rs: A.RuleSetDecl, depth: int = 0) -> List[str]:
    pad = INDENT * depth
    return ([f"{pad}rules {rs.name} {{"] + [f"{pad}{INDENT}{rule(r)};" for r in rs.rules]
            + [f"{pad}}}"])


def method_lines(m: A.Method, depth: int) -> List[str]:
    pad = INDENT * depth
    params = ", ".join(m.params)
    if m.is_function:
        return [f"{pad}defun {m.name}({params}) = {expr(m.body)};"]
    return [f"{pad}def {m.name}({params}) {{"] + stmt_lines(m.body, depth + 1) + [f"{pad}}}"]


def _global_preds(prog: A.Program) -> list:
    names = set()
    for rs in list(prog.rulesets) + [r for c in prog.classes for r in c.rulesets]:
        for r in rs.rules:
            for a in [r.head] + [l.atom for l in r.body]:
                if isinstance(a.pred, A.GlobalPred):
                    names.add(a.pred.name)
    return sorted(names)


def program(prog: A.Program) -> str:
    lines: List[str] = []
    gl = _global_preds(prog)
    if gl:
        lines.append(f"global {', '.join(gl)};")
    for rs in prog.rulesets:
        lines.extend(ruleset_lines(rs))
    for c in prog.classes:
        head = f"class {c.name}" + (f" extends {c.parent}" if c.parent else "") + " {"
        lines.append(head)
        for rs in c.rulesets:
            lines.extend(ruleset_lines(rs, 1))
        for m in c.methods:
            lines.extend(method_lines(m, 1))
        lines.append("}")
    if not isinstance(prog.main, A.Skip) or not lines:
        lines.extend(stmt_lines(prog.main))
    return "\n".join(lines) + "\n"
