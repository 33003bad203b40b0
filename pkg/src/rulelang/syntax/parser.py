"""Recursive-descent parser for the brace-delimited surface language.

Set-producing forms (comprehensions, set literals, ``infer``, unions,
aggregates, ``new`` and calls of ``def`` methods) are statements in the
abstract syntax.  When they occur inside an expression the parser hoists
them into a fresh ``$l`` temporary assigned just before the enclosing
statement.  Name kinds are filled in afterwards by :mod:`.resolve`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, List, Optional

from . import ast as A
from .diagnostics import (
    DEF_IN_EXPRESSION, DEFUN_AS_STATEMENT, DUPLICATE_DEFINITION, MISPLACED_RETURN,
    MISPLACED_SET_EXPR, NESTED_PATTERN, SYNTAX, BAD_TARGET, ParseError, diag,
)
from .lexer import Token, tokenize
from ..values import FALSE, TRUE

UNRESOLVED = "?"

SET_METHODS_EXPR = {"contains", "size", "any", "length"}
SET_METHODS_STMT = {"add", "del"}
AGGREGATES = ("count", "sum", "min", "max")
UNARY_BUILTINS = {"isTuple": "isTuple", "len": "len"}
BINARY_BUILTINS = {"is": "is", "plus": "plus", "select": "select", "minus": "minus",
                   "times": "times", "lt": "lt", "le": "le"}


# Intermediate forms produced while parsing expressions; they never escape
# the parser.

@dataclass
class _Call:
    obj: Any  # expression, or None for a bare call f(...)
    method: str
    args: tuple
    loc: Any = None


@dataclass
class _SetForm:
    kind: str  # compr, setlit, infer, agg, new, union, diff, defcall
    parts: tuple
    loc: Any = None


@dataclass
class _Return:
    stmts: list
    loc: Any = None


@dataclass
class _Scope:
    """Per-body parser state."""

    kind: str  # top, def, defun
    cls: Optional[str] = None
    bound: List[set] = field(default_factory=list)


class Parser:
    def __init__(self, source: str, allow_internal: bool = False):
        self.toks = tokenize(source, allow_internal)
        self.i = 0
        self.prelude: List[Any] = []
        self.scope = _Scope("top")
        self.def_names, self.defun_names = self._scan_method_names()
        self.declared_globals: set = set()
        self.temp_counter = 1 + max(
            (int(m.group(1)) for t in self.toks if t.kind == "name"
             for m in [re.fullmatch(r"\$l(\d+)", t.text)] if m), default=0)

    # ------------------------------------------------------------- helpers

    def _scan_method_names(self):
        defs, defuns = set(), set()
        for k, t in enumerate(self.toks[:-1]):
            if t.kind == "kw" and t.text in ("def", "defun") and self.toks[k + 1].kind == "name":
                (defs if t.text == "def" else defuns).add(self.toks[k + 1].text)
        clash = defs & defuns
        if clash:
            name = sorted(clash)[0]
            raise ParseError([diag(DUPLICATE_DEFINITION,
                                   f"{name} is defined both with def and defun")])
        return defs, defuns

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def at_name(self, text: Optional[str] = None) -> bool:
        return self.tok.kind == "name" and (text is None or self.tok.text == text)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.describe(self.tok)}")
        return self.advance()

    def expect_name(self) -> Token:
        if self.tok.kind != "name":
            self.error(f"expected identifier, found {self.describe(self.tok)}")
        return self.advance()

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    def error(self, msg: str, loc=None, code: str = SYNTAX):
        raise ParseError([diag(code, msg, loc or self.tok.loc)])

    def fresh_temp(self) -> A.Name:
        n = self.temp_counter
        self.temp_counter += 1
        return A.Name(f"$l{n}", UNRESOLVED)

    # ------------------------------------------------------------ program

    def parse_program(self) -> A.Program:
        rulesets, classes, main = [], [], []
        while self.tok.kind != "eof":
            if self.at("rules"):
                rulesets.append(self.parse_ruleset())
            elif self.at("class"):
                classes.append(self.parse_class())
            elif self.at_name("global") and self.peek().kind == "name":
                self.advance()
                self.declared_globals.add(self.expect_name().text)
                while self.accept(","):
                    self.declared_globals.add(self.expect_name().text)
                self.accept(";")
            elif self.accept(";"):
                continue
            else:
                main.extend(self.parse_statement())
                self.end_statement()
        return A.Program(tuple(rulesets), tuple(classes), A.seq(*main))

    def end_statement(self):
        # ';' separates statements; it may be omitted after a closing brace.
        if self.accept(";"):
            return
        if self.toks[self.i - 1].text == "}" or self.at("}") or self.tok.kind == "eof":
            return
        self.error(f"expected ';', found {self.describe(self.tok)}")

    # -------------------------------------------------------------- rules

    def parse_ruleset(self) -> A.RuleSetDecl:
        loc = self.expect("rules").loc
        name = self.expect_name().text
        self.expect("{")
        rules = []
        self.wild = 0
        while not self.accept("}"):
            if self.accept(";"):
                continue
            rules.append(self.parse_rule())
            if not self.at("}"):
                self.expect(";")
        if not rules:
            self.error(f"rule set {name} has no rules", loc)
        return A.RuleSetDecl(name, tuple(rules), loc)

    def parse_rule(self) -> A.Rule:
        loc = self.tok.loc
        if self.accept("if"):
            body = self.parse_hyps()
            self.expect(":")
            head = self.parse_atom(in_head=True)
        else:
            head = self.parse_atom(in_head=True)
            body = self.parse_hyps() if self.accept("if") else ()
        return A.Rule(head, tuple(body), loc)

    def parse_hyps(self) -> list:
        hyps = [self.parse_hyp()]
        while self.accept(","):
            hyps.append(self.parse_hyp())
        return hyps

    def parse_hyp(self) -> A.Literal:
        neg = self.accept("not")
        return A.Literal(self.parse_atom(in_head=False), neg)

    def parse_atom(self, in_head: bool) -> A.Atom:
        if self.accept("self"):
            self.expect(".")
            pred: Any = A.SelfPred(self.expect_name().text)
        else:
            pred = A.ParamPred(self.expect_name().text)
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.parse_rule_term(in_head))
            while self.accept(","):
                args.append(self.parse_rule_term(in_head))
        self.expect(")")
        return A.Atom(pred, tuple(args))

    def parse_rule_term(self, in_head: bool):
        t = self.tok
        if t.kind == "name":
            self.advance()
            if t.text == "_":
                # each wildcard is its own variable; in a head it is unsafe by construction
                self.wild += 1
                return A.LogicVar(f"_{self.wild}")
            return A.LogicVar(t.text)
        return A.Const(self.parse_constant())

    def parse_constant(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return t.value
        if t.kind == "str":
            self.advance()
            return t.value
        if self.accept("-"):
            if self.tok.kind != "int":
                self.error("expected integer after '-'")
            return -self.advance().value
        if self.accept("True"):
            return TRUE
        if self.accept("False"):
            return FALSE
        if self.accept("None"):
            return None
        self.error(f"expected constant, found {self.describe(t)}")

    # ------------------------------------------------------------ classes

    def parse_class(self) -> A.ClassDecl:
        loc = self.expect("class").loc
        name = self.expect_name().text
        parent = self.expect_name().text if self.accept("extends") else None
        self.expect("{")
        rulesets, methods = [], []
        while not self.accept("}"):
            if self.accept(";"):
                continue
            if self.at("rules"):
                rulesets.append(self.parse_ruleset())
            elif self.at("def"):
                methods.append(self.parse_def(name))
            elif self.at("defun"):
                methods.append(self.parse_defun(name))
            else:
                self.error(f"expected rules, def or defun, found {self.describe(self.tok)}")
        return A.ClassDecl(name, parent, tuple(rulesets), tuple(methods), loc)

    def parse_params(self) -> tuple:
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.expect_name().text)
            while self.accept(","):
                params.append(self.expect_name().text)
        self.expect(")")
        return tuple(params)

    def parse_def(self, cls: str) -> A.Method:
        loc = self.expect("def").loc
        name = self.expect_name().text
        params = self.parse_params()
        saved = self.scope
        self.scope = _Scope("def", cls)
        body = self.parse_block(allow_return=True)
        self.scope = saved
        return A.Method(name, params, A.seq(*self.place_returns(body, tail=True)), False, loc)

    def parse_defun(self, cls: str) -> A.Method:
        loc = self.expect("defun").loc
        name = self.expect_name().text
        params = self.parse_params()
        self.expect("=")
        saved = self.scope
        self.scope = _Scope("defun", cls)
        body = self.expr()
        self.scope = saved
        self.accept(";")
        return A.Method(name, params, body, True, loc)

    def place_returns(self, stmts: list, tail: bool) -> list:
        out = []
        for k, s in enumerate(stmts):
            last = tail and k == len(stmts) - 1
            if isinstance(s, _Return):
                if not last:
                    self.error("return is allowed only as the last statement of a def",
                               s.loc, MISPLACED_RETURN)
                out.extend(s.stmts)
            elif isinstance(s, A.If) and isinstance(s.then, list):
                then = A.seq(*self.place_returns(s.then, last))
                orelse = A.seq(*self.place_returns(s.orelse, last))
                out.append(A.If(s.cond, then, orelse, s.loc))
            else:
                out.append(s)
        return out

    # --------------------------------------------------------- statements

    def parse_block(self, allow_return: bool = False) -> list:
        self.expect("{")
        stmts: list = []
        while not self.accept("}"):
            if self.accept(";"):
                continue
            stmts.extend(self.parse_statement(allow_return))
            self.end_statement()
        return stmts

    def block_stmt(self) -> Any:
        return A.seq(*self.place_returns(self.parse_block(), tail=False))

    def parse_statement(self, allow_return: bool = False) -> list:
        """Parse one statement; returns the hoisted prelude followed by the statement."""
        saved = self.prelude
        self.prelude = []
        try:
            stmt = self._statement(allow_return)
            return self.prelude + [stmt]
        finally:
            self.prelude = saved

    def _statement(self, allow_return: bool):
        t = self.tok
        loc = t.loc
        if self.accept("skip"):
            return A.Skip(loc)
        if self.at("if"):
            return self.parse_if(allow_return)
        if self.accept("while"):
            if self.accept("some"):
                return self.parse_some_stmt(loc, loop=True)
            before = len(self.prelude)
            cond = self.expr()
            pre = self.prelude[before:]
            body = self.block_stmt()
            # hoisted parts of the condition are recomputed before every test
            return A.While(cond, A.seq(body, *pre), loc)
        if self.accept("for"):
            pattern = self.parse_pattern()
            self.expect("in")
            source = self.operand_expr()
            self.check_pattern(pattern)
            body = self.block_stmt()
            return A.For(pattern, source, body, loc)
        if self.at("return"):
            self.advance()
            if self.scope.kind != "def":
                self.error("return outside a def", loc, MISPLACED_RETURN)
            target = A.Field(A.Name("self", UNRESOLVED), "$ret")
            stmts = self.assign_to(target, self.raw_expr())
            prelude, self.prelude[:] = list(self.prelude), []
            return _Return(prelude + stmts, loc)
        if self.accept("super"):
            if self.scope.kind != "def":
                self.error("super call outside a def", loc)
            self.expect(".")
            method = self.expect_name().text
            args = self.parse_args()
            return A.SuperCall(self.scope.cls, method, args, loc)

        first = self.postfix(self.primary())
        if self.at(",") or self.at(":="):
            targets = [self.as_target(first, loc)]
            while self.accept(","):
                targets.append(self.as_target(self.postfix(self.primary()), loc))
            self.expect(":=")
            return self.parse_assignment(targets, loc)
        if isinstance(first, _SetForm) and first.kind == "infer":
            obj, queries, kwargs, ruleset = first.parts
            if queries:
                self.error("infer with queries must assign its results", loc)
            return A.Infer((), obj, (), kwargs, ruleset, loc)
        if isinstance(first, _Call) and first.obj is not None:
            if first.method in self.defun_names:
                self.error(f"function {first.method} called as a statement", loc,
                           DEFUN_AS_STATEMENT)
            return A.MethodCall(first.obj, first.method, first.args, loc)
        self.error("expected a statement", loc)

    def parse_if(self, allow_return: bool):
        loc = self.expect("if").loc
        if self.accept("some"):
            return self.parse_some_stmt(loc, loop=False)
        cond = self.expr()
        then = self.parse_block(allow_return)
        orelse: list = []
        if self.accept("else"):
            if self.at("if"):
                orelse = self.parse_statement(allow_return)
            else:
                orelse = self.parse_block(allow_return)
        if allow_return:
            # return placement is resolved by the enclosing def
            return A.If(cond, then, orelse, loc)
        return A.If(cond, A.seq(*self.place_returns(then, False)),
                    A.seq(*self.place_returns(orelse, False)), loc)

    def parse_some_stmt(self, loc, loop: bool):
        before = len(self.prelude)
        iters = self.parse_iterators(("|", "{"))
        cond = A.Lit(TRUE)
        if self.accept("|"):
            cond = self.with_bound(iters, self.expr)
        pre = self.prelude[before:]
        body = self.block_stmt()
        if loop:
            return A.WhileSome(iters, cond, A.seq(body, *pre), loc)
        return A.IfSome(iters, cond, body, loc)

    def as_target(self, e, loc):
        if isinstance(e, A.Name) or isinstance(e, A.Field):
            return e
        self.error("assignment target must be a variable or field", loc, BAD_TARGET)

    def parse_assignment(self, targets: list, loc) -> Any:
        rhs = [self.raw_expr()]
        while self.accept(","):
            rhs.append(self.raw_expr())
        if len(rhs) == 1 and isinstance(rhs[0], _SetForm) and rhs[0].kind == "infer":
            obj, queries, kwargs, ruleset = rhs[0].parts
            if len(queries) != len(targets):
                self.error(f"{len(targets)} targets but {len(queries)} queries", loc)
            return A.Infer(tuple(targets), obj, queries, kwargs, ruleset, loc)
        if len(rhs) != len(targets):
            self.error(f"{len(targets)} targets but {len(rhs)} values", loc)
        if len(targets) == 1:
            stmts = self.assign_to(targets[0], rhs[0], loc)
        else:
            temps = [self.fresh_temp() for _ in rhs]
            stmts = []
            for tmp, r in zip(temps, rhs):
                stmts.extend(self.assign_to(tmp, r, loc))
            for tgt, tmp in zip(targets, temps):
                stmts.append(A.Assign(tgt, tmp, loc))
        self.prelude.extend(stmts[:-1])
        return stmts[-1]

    def assign_to(self, target, raw, loc=None) -> list:
        """Statements storing the value of ``raw`` into ``target``."""
        if isinstance(raw, _Call) and raw.obj is not None and raw.method in self.def_names:
            raw = _SetForm("defcall", (raw.obj, raw.method, raw.args), raw.loc)
        if isinstance(raw, _SetForm):
            return self.materialize(raw, target, loc or raw.loc)
        return [A.Assign(target, self.to_expr(raw), loc)]

    def materialize(self, form: _SetForm, target, loc) -> list:
        k, p = form.kind, form.parts
        if k == "compr":
            elem, iters, cond = p
            return [A.Compr(target, elem, iters, cond, loc)]
        if k == "infer":
            obj, queries, kwargs, ruleset = p
            if len(queries) != 1:
                self.error("infer used as a value must have exactly one query", loc)
            return [A.Infer((target,), obj, queries, kwargs, ruleset, loc)]
        if k == "agg":
            op, source = p
            return [A.Aggregate(target, op, source, loc)]
        if k == "new":
            cls, args, paren = p
            out = [A.NewObj(target, cls, loc)]
            if paren:
                out.append(A.MethodCall(target, "$setup:" + cls, args, loc))
            return out
        if k == "defcall":
            obj, method, args = p
            if not isinstance(obj, A.Name):
                tmp = self.fresh_temp()
                pre = [A.Assign(tmp, obj, loc)]
                obj = tmp
            else:
                pre = []
            return pre + [A.MethodCall(obj, method, args, loc),
                          A.Assign(target, A.Field(obj, "$ret"), loc)]
        if k == "setlit" and not p:
            return [A.NewObj(target, "set", loc)]
        tmp = self.fresh_temp()
        out = [A.NewObj(tmp, "set", loc)]
        if k == "setlit":
            out.extend(A.MethodCall(tmp, "add", (item,), loc) for item in p)
        else:  # union / diff of two set expressions
            left, right = p
            v = A.Name(f"$v{self.temp_counter}", UNRESOLVED)
            self.temp_counter += 1
            add = A.MethodCall(tmp, "add", (v,), loc)
            out.append(A.For(A.PVar(v), left, add if k == "union" else A.If(
                A.Unary("not", A.CallExpr(right, "contains", (v,))), add, A.Skip()), loc))
            if k == "union":
                out.append(A.For(A.PVar(v), right, add, loc))
        out.append(A.Assign(target, tmp, loc))
        return out

    # ---------------------------------------------------------- expressions

    def expr(self):
        return self.to_expr(self.raw_expr())

    def raw_expr(self):
        return self.parse_or()

    def operand_expr(self):
        """An expression without comparisons or boolean operators (iterator sources)."""
        return self.to_expr(self.parse_additive())

    def to_expr(self, e):
        if isinstance(e, _SetForm):
            return self.lift(e)
        if isinstance(e, _Call):
            if e.obj is None:
                self.error(f"unknown function {e.method}", e.loc)
            if e.method in self.def_names:
                return self.lift(_SetForm("defcall", (e.obj, e.method, e.args), e.loc))
            return A.CallExpr(e.obj, e.method, e.args)
        return e

    def lift(self, form: _SetForm):
        if self.scope.kind == "defun":
            self.error("this expression needs a statement and cannot appear in a defun",
                       form.loc, DEF_IN_EXPRESSION)
        tmp = self.fresh_temp()
        stmts = self.materialize(form, tmp, form.loc)
        bound = set().union(*self.scope.bound) if self.scope.bound else set()
        used = _free_names(stmts) & bound
        if used:
            self.error(f"expression depends on iteration variable {sorted(used)[0]} and "
                       "cannot be computed before the enclosing statement",
                       form.loc, MISPLACED_SET_EXPR)
        self.prelude.extend(stmts)
        return tmp

    def parse_or(self):
        left = self.parse_and()
        while self.at("or"):
            self.advance()
            left = A.Or(self.to_expr(left), self.to_expr(self.parse_and()))
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.at("and"):
            self.advance()
            left = A.And(self.to_expr(left), self.to_expr(self.parse_not()))
        return left

    def parse_not(self):
        if self.at("not"):
            self.advance()
            return A.Unary("not", self.to_expr(self.parse_not()))
        if self.at("some") or self.at("each"):
            kind = self.advance().text
            iters = self.parse_iterators(("|",) if kind == "each" else
                                         ("|", ")", ",", "}", "{", ";", "and", "or", "else"))
            cond = A.Lit(TRUE)
            if kind == "each" or self.at("|"):
                self.expect("|")
                cond = self.with_bound(iters, self.expr)
            return (A.Some if kind == "some" else A.Each)(iters, cond)
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_additive()
        while True:
            if self.at("==") or self.at("is"):
                self.advance()
                if self.accept("not"):
                    left = A.Unary("not", self.binary("is", left, self.parse_additive()))
                else:
                    left = self.binary("is", left, self.parse_additive())
            elif self.at("!="):
                self.advance()
                left = A.Unary("not", self.binary("is", left, self.parse_additive()))
            elif self.at("<") or self.at("<="):
                op = "lt" if self.advance().text == "<" else "le"
                left = self.binary(op, left, self.parse_additive())
            elif self.at(">") or self.at(">="):
                op = "lt" if self.advance().text == ">" else "le"
                right = self.parse_additive()
                left = self.binary(op, right, left)
            elif self.at("in"):
                self.advance()
                right = self.to_expr(self.parse_additive())
                left = A.CallExpr(right, "contains", (self.to_expr(left),))
            elif self.at("not") and self.peek().kind == "kw" and self.peek().text == "in":
                self.advance()
                self.advance()
                right = self.to_expr(self.parse_additive())
                left = A.Unary("not", A.CallExpr(right, "contains", (self.to_expr(left),)))
            else:
                return left

    def binary(self, op, left, right):
        return A.Binary(op, self.to_expr(left), self.to_expr(right))

    def parse_additive(self):
        left = self.parse_term()
        while self.at("+") or self.at("-"):
            op = self.advance()
            right = self.parse_term()
            if _is_set_form(left) or _is_set_form(right):
                kind = "union" if op.text == "+" else "diff"
                left = _SetForm(kind, (self.to_expr(left), self.to_expr(right)), op.loc)
            else:
                left = self.binary("plus" if op.text == "+" else "minus", left, right)
        return left

    def parse_term(self):
        left = self.parse_unary()
        while self.at("*"):
            self.advance()
            left = self.binary("times", left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.at("-"):
            self.advance()
            if self.tok.kind == "int":
                return A.Lit(-self.advance().value)
            return A.Unary("neg", self.to_expr(self.parse_unary()))
        return self.postfix(self.primary())

    def postfix(self, e):
        while self.at("."):
            self.advance()
            loc = self.tok.loc
            if self.accept("infer"):
                e = self.parse_infer(self.to_expr(e), loc)
                continue
            name = self.expect_name().text
            if self.at("("):
                e = _Call(self.to_expr(e), name, self.parse_args(), loc)
            else:
                e = A.Field(self.to_expr(e), name)
        return e

    def parse_args(self) -> tuple:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.expr())
            while self.accept(","):
                args.append(self.expr())
        self.expect(")")
        return tuple(args)

    def primary(self):
        t = self.tok
        loc = t.loc
        if t.kind == "int":
            self.advance()
            return A.Lit(t.value)
        if t.kind == "str":
            self.advance()
            return A.Lit(t.value)
        if self.accept("True"):
            return A.Lit(TRUE)
        if self.accept("False"):
            return A.Lit(FALSE)
        if self.accept("None"):
            return A.Lit(None)
        if self.accept("self"):
            if self.scope.kind == "top":
                self.error("self outside a method", loc)
            return A.Name("self", UNRESOLVED)
        if self.accept("("):
            if self.accept(")"):
                return A.TupleExpr(())
            first = self.raw_expr()
            if self.accept(")"):
                return first
            items = [self.to_expr(first)]
            while self.accept(","):
                if self.at(")"):
                    break
                items.append(self.expr())
            self.expect(")")
            return A.TupleExpr(tuple(items))
        if self.at("{"):
            return self.parse_braces()
        if self.accept("new"):
            cls = self.tok.text if self.tok.kind == "name" else None
            if cls is None:
                self.error("expected class name after new")
            self.advance()
            if self.at("("):
                return _SetForm("new", (cls, self.parse_args(), True), loc)
            return _SetForm("new", (cls, (), False), loc)
        if self.accept("infer"):
            return self.parse_infer(None, loc)
        if self.at("not") or self.at("some") or self.at("each"):
            return self.parse_not()
        if t.kind == "name":
            self.advance()
            if self.at("("):
                return self.parse_call(t.text, loc)
            return A.Name(t.text, UNRESOLVED)
        if t.kind == "kw" and t.text == "is" and self.peek().text == "(":
            self.advance()
            return self.parse_call("is", loc)
        self.error(f"unexpected {self.describe(t)}")

    def parse_call(self, name: str, loc):
        if name == "isinstance":
            self.expect("(")
            operand = self.expr()
            self.expect(",")
            cls = self.expect_name().text
            self.expect(")")
            return A.IsInstance(operand, cls)
        if name in AGGREGATES:
            self.expect("(")
            src = self.expr()
            self.expect(")")
            return _SetForm("agg", (name, src), loc)
        args = self.parse_args()
        if name in UNARY_BUILTINS:
            self.arity(name, args, 1, loc)
            return A.Unary(UNARY_BUILTINS[name], args[0])
        if name in BINARY_BUILTINS:
            self.arity(name, args, 2, loc)
            return A.Binary(BINARY_BUILTINS[name], args[0], args[1])
        if name in ("union", "diff"):
            self.arity(name, args, 2, loc)
            return _SetForm(name, args, loc)
        if self.scope.kind != "top" and (name in self.def_names or name in self.defun_names):
            return _Call(A.Name("self", UNRESOLVED), name, args, loc)
        return _Call(None, name, args, loc)

    def arity(self, name, args, n, loc):
        if len(args) != n:
            self.error(f"{name} takes {n} argument(s), got {len(args)}", loc)

    def parse_braces(self):
        loc = self.expect("{").loc
        if self.accept("}"):
            return _SetForm("setlit", (), loc)
        # Decide between a set literal and a comprehension by looking for ':'
        # at brace depth zero.
        if self.comprehension_ahead():
            return self.parse_comprehension(loc)
        items = [self.expr()]
        while self.accept(","):
            if self.at("}"):
                break
            items.append(self.expr())
        self.expect("}")
        return _SetForm("setlit", tuple(items), loc)

    def comprehension_ahead(self) -> bool:
        depth = 0
        k = self.i
        while k < len(self.toks):
            t = self.toks[k]
            if t.kind == "op" and t.text in "([{":
                depth += 1
            elif t.kind == "op" and t.text in ")]}":
                if depth == 0:
                    return False
                depth -= 1
            elif depth == 0 and t.kind == "op" and t.text in (":", "|"):
                return t.text == ":"
            elif t.kind == "eof":
                return False
            k += 1
        return False

    def parse_comprehension(self, loc):
        # The element is parsed after the iterators so iteration variables are
        # bound while it is converted; rewind to re-read it.
        elem_start = self.i
        self.skip_to_colon()
        self.expect(":")
        iters = self.parse_iterators(("|", "}"))
        cond: Any = A.Lit(TRUE)
        if self.accept("|"):
            parts = [self.with_bound(iters, self.expr)]
            while self.accept(","):
                parts.append(self.with_bound(iters, self.expr))
            cond = parts[0]
            for p in parts[1:]:
                cond = A.And(cond, p)
        end = self.i
        self.i = elem_start
        elem = self.with_bound(iters, self.expr)
        self.expect(":")
        self.i = end
        self.expect("}")
        self.check_pattern_list(iters)
        return _SetForm("compr", (elem, iters, cond), loc)

    def skip_to_colon(self):
        depth = 0
        while True:
            t = self.tok
            if t.kind == "op" and t.text in "([{":
                depth += 1
            elif t.kind == "op" and t.text in ")]}":
                depth -= 1
            elif depth == 0 and self.at(":"):
                return
            self.advance()

    def with_bound(self, iters, fn):
        names = set()
        for it in iters:
            names |= _pattern_var_ids(it.pattern)
        self.scope.bound.append(names)
        try:
            return fn()
        finally:
            self.scope.bound.pop()

    def parse_iterators(self, stops) -> tuple:
        iters = []
        names: set = set()
        while True:
            pat = self.parse_pattern()
            self.expect("in")
            self.scope.bound.append(set(names))
            try:
                src = self.operand_expr()
            finally:
                self.scope.bound.pop()
            pat = _join_repeats(pat, names)
            names |= _pattern_var_ids(pat)
            iters.append(A.Iter(pat, src))
            if not self.accept(","):
                break
        self.check_pattern_list(iters)
        return tuple(iters)

    def parse_pattern(self):
        loc = self.tok.loc
        if self.at("("):
            self.advance()
            elems = []
            if not self.at(")"):
                elems.append(self.pattern_elem())
                while self.accept(","):
                    if self.at(")"):
                        break
                    elems.append(self.pattern_elem())
            self.expect(")")
            if len(elems) == 1 and not self.toks[self.i - 2].text == ",":
                e = elems[0]
                if isinstance(e, A.PVar):
                    return e
            return A.TuplePat(tuple(elems))
        if self.at_name("_"):
            self.advance()
            return A.PWild()
        if self.accept("self"):
            self.expect(".")
            return A.PVar(A.Field(A.Name("self", UNRESOLVED), self.expect_name().text))
        if self.tok.kind == "name":
            return A.PVar(A.Name(self.advance().text, UNRESOLVED))
        self.error("expected a pattern", loc)

    def pattern_elem(self):
        t = self.tok
        if self.at_name("_") and self.peek().text in (",", ")"):
            self.advance()
            return A.PWild()
        if self.accept("="):
            if self.accept("self"):
                self.expect(".")
                return A.PEq(A.Field(A.Name("self", UNRESOLVED), self.expect_name().text))
            return A.PEq(A.Name(self.expect_name().text, UNRESOLVED))
        if t.kind == "name" and self.peek().text in (",", ")"):
            self.advance()
            return A.PVar(A.Name(t.text, UNRESOLVED))
        if (t.kind == "kw" and t.text == "self" and self.peek().text == "."
                and self.peek(2).kind == "name" and self.peek(3).text in (",", ")")):
            self.advance()
            self.advance()
            return A.PVar(A.Field(A.Name("self", UNRESOLVED), self.advance().text))
        if self.at("(") and self._nested_tuple_pattern():
            self.error("nested tuple patterns are not supported", t.loc, NESTED_PATTERN)
        return A.PExpr(self.operand_expr())

    def _nested_tuple_pattern(self) -> bool:
        # '(' followed by something that only makes sense as a pattern
        k = self.i + 1
        depth = 0
        while k < len(self.toks):
            t = self.toks[k]
            if t.text in ("(", "[", "{"):
                depth += 1
            elif t.text in (")", "]", "}"):
                if depth == 0:
                    return False
                depth -= 1
            elif depth == 0 and (t.text == "=" or (t.text == "_" and t.kind == "name")):
                return True
            k += 1
        return False

    def check_pattern(self, pat):
        if isinstance(pat, A.TuplePat):
            seen = set()
            for e in pat.elems:
                if isinstance(e, A.PVar) and isinstance(e.var, A.Name):
                    if e.var.id in seen:
                        self.error(f"variable {e.var.id} occurs twice in one pattern",
                                   code=NESTED_PATTERN)
                    seen.add(e.var.id)

    def check_pattern_list(self, iters):
        for it in iters:
            self.check_pattern(it.pattern)

    def parse_infer(self, obj, loc):
        self.expect("(")
        queries, kwargs, ruleset = [], [], None
        while not self.at(")"):
            if self.at("rules") and self.peek().text == "=":
                self.advance()
                self.advance()
                ruleset = self.expect_name().text
                if not self.accept(","):
                    break
                continue
            name_tok = self.expect_name()
            if self.accept("="):
                if name_tok.text == "rules":
                    ruleset = self.expect_name().text
                else:
                    kwargs.append((name_tok.text, self.expr()))
            else:
                pattern = None
                if self.at("("):
                    pattern = self.parse_pattern()
                    if not isinstance(pattern, A.TuplePat):
                        pattern = A.TuplePat((pattern,))
                    self.check_pattern(pattern)
                queries.append(A.Query(name_tok.text, pattern))
            if not self.accept(","):
                break
        self.expect(")")
        if ruleset is None:
            self.error("infer requires rules=<rule set name>", loc)
        return _SetForm("infer", (obj, tuple(queries), tuple(kwargs), ruleset), loc)


def _is_set_form(e) -> bool:
    return isinstance(e, _SetForm) and e.kind in ("compr", "setlit", "infer", "union", "diff")


def _pattern_var_ids(pat) -> set:
    if isinstance(pat, A.PVar) and isinstance(pat.var, A.Name):
        return {pat.var.id}
    if isinstance(pat, A.TuplePat):
        return {e.var.id for e in pat.elems if isinstance(e, A.PVar) and isinstance(e.var, A.Name)}
    return set()


def _join_repeats(pat, seen: set):
    """Later occurrences of an already-bound iteration variable match its value."""
    if isinstance(pat, A.TuplePat):
        return A.TuplePat(tuple(
            A.PEq(e.var) if isinstance(e, A.PVar) and isinstance(e.var, A.Name)
            and e.var.id in seen else e for e in pat.elems))
    return pat


def _free_names(stmts: list) -> set:
    # names read or written, minus those bound by patterns inside the statements
    used, binding = set(), set()
    for s in stmts:
        for n in A.walk(s):
            if isinstance(n, A.Name):
                used.add(n.id)
            elif isinstance(n, A.Iter) or isinstance(n, A.For):
                binding |= _pattern_var_ids(n.pattern)
    return used - binding


def parse_surface(source: str, allow_internal: bool = False):
    """Parse into a surface Program with unresolved names; also returns declared globals."""
    p = Parser(source, allow_internal)
    prog = p.parse_program()
    return prog, p.declared_globals, p.def_names, p.defun_names
