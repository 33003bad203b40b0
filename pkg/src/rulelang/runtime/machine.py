"""Interpreter for desugared programs.

Statements run off an explicit work list.  Each popped item is one step of
the small-step semantics: executing a statement, advancing a loop, or
returning from an inlined method body.  Expressions are side-effect free and
are evaluated to values within the step that needs them.

Variables bound by substitution in the formal semantics (method parameters,
``self``, loop and quantifier variables) live in per-call environments; a
loop restores the previous binding of its variable when it finishes.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

from .. import rules as R
from ..syntax import ast as A
from ..values import FALSE, GLOBAL_ADDR, TRUE, Addr, Bool, as_bool, canon_key, from_python, identical
from .heap import BUILTIN, Heap
from .maintain import Applier, Inference, RuntimeFailure, field_of, maint_sub, param_pred, query_pred

DEFAULT_STEP_BUDGET = 10 ** 8
MODES = ("no-alias", "alias-checked")

_EXEC, _LOOP, _RETURN = 0, 1, 2
_UNBOUND = object()


class StepBudgetExceeded(Exception):
    def __init__(self, steps: int):
        self.steps = steps
        super().__init__(f"step budget of {steps} exhausted")


@dataclass
class RunResult:
    steps: int
    heap: Heap
    machine: "Machine"

    def global_value(self, name: str, deep: bool = True) -> Any:
        return self.machine.global_value(name, deep)


def _check_int(v, op):
    if type(v) is not int:
        raise RuntimeFailure(f"{op} expects integers, got {v!r}")
    return v


def _binary(op, l, r):
    if op == "is":
        return as_bool(identical(l, r))
    if op == "plus":
        return _check_int(l, op) + _check_int(r, op)
    if op == "minus":
        return _check_int(l, op) - _check_int(r, op)
    if op == "times":
        return _check_int(l, op) * _check_int(r, op)
    if op == "select":
        if type(l) is not tuple or type(r) is not int or not 1 <= r <= len(l):
            raise RuntimeFailure(f"select({l!r}, {r!r}) out of range")
        return l[r - 1]
    if op in ("lt", "le"):
        if not ((type(l) is int and type(r) is int) or (type(l) is str and type(r) is str)):
            raise RuntimeFailure(f"{op} expects two integers or two strings, got {l!r}, {r!r}")
        return as_bool(l < r if op == "lt" else l <= r)
    raise RuntimeFailure(f"unknown operator {op}")


def _unary(op, v):
    if op == "not":
        if type(v) is not Bool:
            raise RuntimeFailure(f"not expects a boolean, got {v!r}")
        return FALSE if v.value else TRUE
    if op == "isTuple":
        return as_bool(type(v) is tuple)
    if op == "len":
        if type(v) is not tuple:
            raise RuntimeFailure(f"len expects a tuple, got {v!r}")
        return len(v)
    if op == "neg":
        return -_check_int(v, op)
    raise RuntimeFailure(f"unknown operator {op}")


class Machine:
    """One program run: heap, maintenance stack and work list.

    ``mode`` is ``no-alias`` (updates to derived predicates are expected to
    have been rejected statically) or ``alias-checked`` (mutating a set that
    a derived predicate currently holds is also a runtime error).
    ``hook(event, machine)`` is called with ``'pre'`` right before each
    maintenance computation and ``'post'`` right after it is applied.
    """

    def __init__(self, program: A.Program, mode: str = "no-alias",
                 step_budget: int = DEFAULT_STEP_BUDGET,
                 hook: Optional[Callable[[str, "Machine"], None]] = None):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.program = program
        self.mode = mode
        self.step_budget = step_budget
        self.hook = hook
        self.heap = Heap()
        self.inference = Inference(self.heap)
        self.applier = Applier(self.heap)
        self.steps = 0
        self.classes: Dict[str, A.ClassDecl] = {c.name: c for c in program.classes}
        self.global_rulesets: Dict[str, A.RuleSetDecl] = {r.name: r for r in program.rulesets}
        self._insts: Dict[tuple, R.InstRuleSet] = {}
        self._class_rs: Dict[str, Dict[str, Tuple[str, A.RuleSetDecl]]] = {}
        self._class_derived: Dict[str, frozenset] = {}
        self._methods: Dict[tuple, Optional[Tuple[str, A.Method]]] = {}
        self.global_derived = self._global_derived_vars()
        bottom = tuple(self._instance(None, rs, GLOBAL_ADDR) for rs in program.rulesets)
        self.stack: List[tuple] = [bottom]
        self._rule_count = len(bottom)
        self.work: list = []
        self.maintenance_runs = 0
        self._compiled: Dict[int, tuple] = {}

    # ------------------------------------------------------------ classes

    def _chain(self, cls: str) -> List[A.ClassDecl]:
        out = []
        c = self.classes.get(cls)
        while c is not None:
            out.append(c)
            c = self.classes.get(c.parent) if c.parent else None
        return out

    def class_rulesets(self, cls: str) -> Dict[str, Tuple[str, A.RuleSetDecl]]:
        """Rule sets visible in ``cls``: its own and inherited ones, a subclass
        definition hiding a parent's rule set of the same name."""
        hit = self._class_rs.get(cls)
        if hit is None:
            hit = {}
            for c in self._chain(cls):
                for rs in c.rulesets:
                    hit.setdefault(rs.name, (c.name, rs))
            self._class_rs[cls] = hit
        return hit

    def class_derived(self, cls: str) -> frozenset:
        hit = self._class_derived.get(cls)
        if hit is None:
            names = set()
            for _, rs in self.class_rulesets(cls).values():
                for r in rs.rules:
                    if isinstance(r.head.pred, A.SelfPred):
                        names.add(r.head.pred.name)
            hit = self._class_derived[cls] = frozenset(names)
        return hit

    def _global_derived_vars(self) -> frozenset:
        decls = list(self.program.rulesets) + [rs for c in self.program.classes for rs in c.rulesets]
        names = set()
        for rs in decls:
            for r in rs.rules:
                p = r.head.pred
                if isinstance(p, A.GlobalPred) or (isinstance(p, A.FieldPred) and p.owner == "gv"):
                    names.add(p.name)
        return frozenset(names)

    def find_method(self, cls: str, name: str, start_above: Optional[str] = None):
        key = (cls, name, start_above)
        if key not in self._methods:
            chain = self._chain(cls)
            if start_above is not None:
                names = [c.name for c in chain]
                chain = chain[names.index(start_above) + 1:] if start_above in names else []
            found = None
            for c in chain:
                for m in c.methods:
                    if m.name == name:
                        found = (c.name, m)
                        break
                if found:
                    break
            self._methods[key] = found
        return self._methods[key]

    def _instance(self, cls: Optional[str], decl: A.RuleSetDecl, receiver: Addr) -> R.InstRuleSet:
        key = (cls, decl.name, id(decl), receiver)
        inst = self._insts.get(key)
        if inst is None:
            inst = self._insts[key] = R.instantiate(decl, receiver, cls)
        return inst

    def instances_of(self, a: Addr) -> tuple:
        cls = self.heap.types[a]
        return tuple(self._instance(owner, rs, a) for owner, rs in self.class_rulesets(cls).values())

    # ------------------------------------------------------------ checks

    def legal_assign(self, a: Addr, f: str) -> bool:
        t = self.heap.types.get(a)
        if t is None or t in BUILTIN:
            return False
        if a == GLOBAL_ADDR:
            return f not in self.global_derived
        return f not in self.class_derived(t)

    def _field_owner(self, a, what: str) -> dict:
        if type(a) is not Addr or a not in self.heap.objs:
            raise RuntimeFailure(f"{what} on non-object value {a!r}")
        obj = self.heap.objs[a]
        if type(obj) is not dict:
            raise RuntimeFailure(f"{what} on a {self.heap.types[a]} object")
        return obj

    def _guard_alias(self, a: Addr) -> None:
        """In alias-checked mode, refuse to mutate a set held by a derived
        predicate variable of a rule set currently being maintained."""
        for frame in self.stack:
            for inst in frame:
                for pred in inst.info.derived_vars:
                    owner, name = field_of(pred)
                    obj = self.heap.objs.get(owner)
                    if type(obj) is dict and obj.get(name) == a:
                        raise RuntimeFailure(f"update to derived predicate {pred} through an alias")

    # ------------------------------------------------------------ maintenance

    def maintain(self) -> None:
        if not self._rule_count:
            return
        if self.hook:
            self.hook("pre", self)
        theta = maint_sub(self.inference, self.stack)
        self.applier.apply(theta)
        self.maintenance_runs += 1
        if self.hook:
            self.hook("post", self)

    def _push_frame(self, frame: tuple) -> None:
        self.stack.append(frame)
        self._rule_count += len(frame)

    def _pop_frame(self) -> None:
        frame = self.stack.pop()
        self._rule_count -= len(frame)

    # ------------------------------------------------------------ expressions

    def eval(self, e, env: dict):
        return self.compiled(e)(env)

    def compiled(self, e) -> Callable[[dict], Any]:
        """A closure evaluating ``e`` in an environment, built once per node."""
        hit = self._compiled.get(id(e))
        if hit is None or hit[1] is not e:
            hit = (self._compile(e), e)
            self._compiled[id(e)] = hit
        return hit[0]

    def _compile(self, e) -> Callable[[dict], Any]:
        t = type(e)
        heap = self.heap
        objs, types = heap.objs, heap.types
        if t is A.Lit:
            value = e.value
            return lambda env: value
        if t is A.Name:
            name = e.id

            def var(env):
                try:
                    return env[name]
                except KeyError:
                    raise RuntimeFailure(f"unbound variable {name}") from None
            return var
        if t is A.GlobalObj:
            return lambda env: GLOBAL_ADDR
        if t is A.Field:
            sub, name = self.compiled(e.obj), e.name

            def get_field(env):
                a = sub(env)
                obj = objs.get(a) if type(a) is Addr else None
                if type(obj) is not dict:
                    self._field_owner(a, f"reading field {name}")
                try:
                    return obj[name]
                except KeyError:
                    raise RuntimeFailure(f"object {a!r} has no field {name}") from None
            return get_field
        if t is A.Binary:
            l, r, op = self.compiled(e.left), self.compiled(e.right), e.op
            if op == "is":
                def is_(env):
                    x, y = l(env), r(env)
                    return TRUE if x == y and type(x) is type(y) else FALSE
                return is_
            return lambda env: _binary(op, l(env), r(env))
        if t is A.Unary:
            sub, op = self.compiled(e.operand), e.op
            if op == "not":
                def not_(env):
                    v = sub(env)
                    if v is TRUE:
                        return FALSE
                    if v is FALSE:
                        return TRUE
                    return _unary(op, v)
                return not_
            return lambda env: _unary(op, sub(env))
        if t is A.TupleExpr:
            items = tuple(self.compiled(x) for x in e.items)
            if len(items) == 2:
                a, b = items
                return lambda env: (a(env), b(env))
            return lambda env: tuple(f(env) for f in items)
        if t is A.Or:
            l, r = self.compiled(e.left), self.compiled(e.right)

            def or_(env):
                x = l(env)
                if x is TRUE:
                    return TRUE
                if x is not FALSE:
                    raise RuntimeFailure(f"or expects booleans, got {x!r}")
                y = r(env)
                if type(y) is not Bool:
                    raise RuntimeFailure(f"or expects booleans, got {y!r}")
                return y
            return or_
        if t is A.Some:
            return self._compile_some(e)
        if t is A.IsInstance:
            sub, cls = self.compiled(e.operand), e.cls
            return lambda env: as_bool(type(v := sub(env)) is Addr and types.get(v) == cls)
        if t is A.CallExpr:
            return self._compile_call(e)
        raise RuntimeFailure(f"cannot evaluate {type(e).__name__}")

    def _compile_some(self, e: A.Some):
        it = e.iters[0]
        if not isinstance(it.pattern, A.PVar) or not isinstance(it.pattern.var, A.Name):
            raise RuntimeFailure("quantifier pattern was not desugared")
        name = it.pattern.var.id
        source, cond = self.compiled(it.source), self.compiled(e.cond)

        def some(env):
            values = self._elements(source(env))
            old = env.get(name, _UNBOUND)
            try:
                for v in values:
                    env[name] = v
                    c = cond(env)
                    if c is TRUE:
                        return TRUE
                    if c is not FALSE:
                        raise RuntimeFailure(f"condition is not a boolean: {c!r}")
                return FALSE
            finally:
                if old is _UNBOUND:
                    env.pop(name, None)
                else:
                    env[name] = old
        return some

    def _compile_call(self, e: A.CallExpr):
        recv_f = self.compiled(e.obj)
        arg_fs = tuple(self.compiled(a) for a in e.args)
        method = e.method
        objs, types = self.heap.objs, self.heap.types

        def call(env):
            recv = recv_f(env)
            t = types.get(recv) if type(recv) is Addr else None
            if t == "set" and method == "contains" and len(arg_fs) == 1:
                return TRUE if arg_fs[0](env) in objs[recv] else FALSE
            args = [f(env) for f in arg_fs]
            if t is None:
                raise RuntimeFailure(f"method {method} called on non-object {recv!r}")
            if t in BUILTIN:
                return self._builtin_query(recv, t, method, args)
            found = self.find_method(t, method)
            if found is None or not found[1].is_function:
                raise RuntimeFailure(f"class {t} has no function {method}")
            m = found[1]
            if len(args) != len(m.params):
                raise RuntimeFailure(f"{method} expects {len(m.params)} arguments, got {len(args)}")
            self._tick()
            frame = dict(zip(m.params, args))
            frame["self"] = recv
            try:
                return self.compiled(m.body)(frame)
            except RecursionError:
                raise RuntimeFailure(f"function recursion too deep in {method}") from None
        return call

    def _elements(self, v) -> list:
        if type(v) is Addr and self.heap.types.get(v) in BUILTIN:
            return self.heap.elements(v)
        raise RuntimeFailure(f"cannot iterate over {v!r}")

    def _builtin_query(self, a: Addr, t: str, method: str, args: list):
        obj = self.heap.objs[a]
        if method == "contains" and len(args) == 1:
            v = args[0]
            if t == "set":
                return as_bool(_member(obj, v))
            return as_bool(any(identical(v, x) for x in obj))
        if t == "set" and method == "size" and not args:
            return len(obj)
        if t == "set" and method == "any" and not args:
            els = self.heap.elements(a)
            return els[0] if els else None
        if t == "sequence" and method == "length" and not args:
            return len(obj)
        raise RuntimeFailure(f"{t} has no method {method}/{len(args)}")

    # ------------------------------------------------------------ statements

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.step_budget:
            raise StepBudgetExceeded(self.step_budget)

    def _assign(self, target, v, env: dict, maintain: bool = True) -> None:
        if type(target) is A.Name:
            env[target.id] = v
            return
        if type(target) is not A.Field:
            raise RuntimeFailure(f"cannot assign to {type(target).__name__}")
        a = self.compiled(target.obj)(env)
        obj = self._field_owner(a, f"assigning field {target.name}")
        if not self.legal_assign(a, target.name):
            raise RuntimeFailure(f"illegal assignment to derived predicate {target.name}")
        obj[target.name] = v
        if maintain:
            self.maintain()

    def _exec(self, s, env: dict) -> None:
        t = type(s)
        work = self.work
        if t is A.Seq:
            for x in reversed(s.stmts):
                work.append((_EXEC, x, env))
        elif t is A.Assign:
            self._assign(s.target, self.compiled(s.value)(env), env)
        elif t is A.If:
            c = self.compiled(s.cond)(env)
            if c is TRUE:
                nxt = s.then
            elif c is FALSE:
                nxt = s.orelse
            else:
                raise RuntimeFailure(f"condition is not a boolean: {c!r}")
            if type(nxt) is not A.Skip:
                work.append((_EXEC, nxt, env))
        elif t is A.For:
            values = list(self._elements(self.compiled(s.source)(env)))
            self._start_loop(s.pattern, values, s.body, env)
        elif t is A.ForInTuple:
            self._start_loop(s.pattern, list(s.values), s.body, env)
        elif t is A.While:
            c = self.compiled(s.cond)(env)
            if type(c) is not Bool:
                raise RuntimeFailure(f"condition is not a boolean: {c!r}")
            if c.value:
                work.append((_EXEC, s, env))
                work.append((_EXEC, s.body, env))
        elif t is A.MethodCall:
            self._method_call(s, env)
        elif t is A.NewObj:
            self._new(s, env)
        elif t is A.SuperCall:
            recv = env.get("self", _UNBOUND)
            if recv is _UNBOUND:
                raise RuntimeFailure("super call outside a method")
            args = [self.compiled(a)(env) for a in s.args]
            found = self.find_method(self.heap.types[recv], s.method, start_above=s.cls)
            if found is None or found[1].is_function:
                raise RuntimeFailure(f"no parent method {s.method} above {s.cls}")
            self._invoke(recv, found[1], args)
        elif t is A.Infer:
            self._infer(s, env)
        elif t is A.Skip:
            pass
        elif t is A.Return:
            self._return()
        else:
            raise RuntimeFailure(f"cannot execute {t.__name__}")

    def _start_loop(self, pattern, values: list, body, env: dict) -> None:
        target = pattern.var if isinstance(pattern, A.PVar) else pattern
        saved = _UNBOUND
        if type(target) is A.Name and target.kind == "param":
            saved = env.get(target.id, _UNBOUND)
        self.work.append((_LOOP, target, values, 0, body, env, saved))

    def _loop(self, item) -> None:
        _, target, values, i, body, env, saved = item
        if i < len(values):
            self.work.append((_LOOP, target, values, i + 1, body, env, saved))
            self.work.append((_EXEC, body, env))
            if type(target) is A.Name:
                env[target.id] = values[i]
            else:
                self._assign(target, values[i], env)
            return
        if type(target) is A.Name and target.kind == "param":
            if saved is _UNBOUND:
                env.pop(target.id, None)
            else:
                env[target.id] = saved

    def _new(self, s: A.NewObj, env: dict) -> None:
        if s.cls not in BUILTIN and s.cls not in self.classes:
            raise RuntimeFailure(f"unknown class {s.cls}")
        a = self.heap.alloc(s.cls)
        self._assign(s.target, a, env)

    def _method_call(self, s: A.MethodCall, env: dict) -> None:
        recv = self.compiled(s.obj)(env)
        args = [self.compiled(a)(env) for a in s.args]
        t = self.heap.type_of(recv)
        if t is None:
            raise RuntimeFailure(f"method {s.method} called on non-object {recv!r}")
        if t in BUILTIN:
            self._builtin_update(recv, t, s.method, args)
            return
        found = self.find_method(t, s.method)
        if found is None or found[1].is_function:
            raise RuntimeFailure(f"class {t} has no method {s.method}")
        self._invoke(recv, found[1], args)

    def _invoke(self, recv: Addr, m: A.Method, args: list) -> None:
        if len(args) != len(m.params):
            raise RuntimeFailure(f"{m.name} expects {len(m.params)} arguments, got {len(args)}")
        frame = dict(zip(m.params, args))
        frame["self"] = recv
        self.work.append((_RETURN,))
        self.work.append((_EXEC, m.body, frame))
        self._push_frame(self.instances_of(recv))
        self.maintain()

    def _return(self) -> None:
        if len(self.stack) < 2:
            raise RuntimeFailure("return without a pending call")
        self._pop_frame()
        self.maintain()

    def _builtin_update(self, a: Addr, t: str, method: str, args: list) -> None:
        obj = self.heap.objs[a]
        if method == "add" and len(args) == 1:
            if self.mode == "alias-checked" and t == "set":
                self._guard_alias(a)
            if t == "set":
                if _member(obj, args[0]):
                    return self.maintain()
                obj.add(args[0])
            else:
                obj.append(args[0])
        elif method == "del" and len(args) == 1 and t == "set":
            if self.mode == "alias-checked":
                self._guard_alias(a)
            if not _member(obj, args[0]):
                return self.maintain()
            obj.discard(args[0])
        else:
            raise RuntimeFailure(f"{t} has no updating method {method}/{len(args)}")
        self.heap.bump(a)
        self.maintain()

    def _infer(self, s: A.Infer, env: dict) -> None:
        if s.obj is None:
            decl = self.global_rulesets.get(s.ruleset)
            if decl is None:
                raise RuntimeFailure(f"unknown rule set {s.ruleset}")
            inst = self._instance(None, decl, GLOBAL_ADDR)
        else:
            recv = self.compiled(s.obj)(env)
            t = self.heap.type_of(recv)
            if t is None or t in BUILTIN:
                raise RuntimeFailure(f"infer on non-object {recv!r}")
            hit = self.class_rulesets(t).get(s.ruleset)
            if hit is None:
                raise RuntimeFailure(f"class {t} has no rule set {s.ruleset}")
            inst = self._instance(hit[0], hit[1], recv)
        args = {}
        for name, expr in s.kwargs:
            pred = param_pred(inst, name)
            if pred is None:
                raise RuntimeFailure(f"{name} is not a base predicate parameter of {s.ruleset}")
            args[pred] = self.compiled(expr)(env)
        preds = []
        for q in s.queries:
            pred = query_pred(inst, q.pred)
            if pred is None:
                raise RuntimeFailure(f"{q.pred} is not a derived predicate of {s.ruleset}")
            preds.append(pred)
        if len(s.targets) != len(preds):
            raise RuntimeFailure("infer needs one target per query")
        # resolve targets first so a failing legality check leaves the heap untouched
        slots = []
        for target in s.targets:
            if type(target) is A.Field:
                a = self.compiled(target.obj)(env)
                self._field_owner(a, f"assigning field {target.name}")
                if not self.legal_assign(a, target.name):
                    raise RuntimeFailure(f"illegal assignment to derived predicate {target.name}")
                slots.append((a, target.name))
            else:
                slots.append((None, target))
        theta, result = self.inference.inf_sub(inst, args)
        values = [self.heap.new_set(result[p]) if p in result else None for p in preds]
        for (a, target), v in zip(slots, values):
            if a is None:
                self._assign(target, v, env, maintain=False)
            else:
                self.heap.objs[a][target] = v
        self.applier.apply(theta)
        self.maintain()

    # ------------------------------------------------------------ driving

    def step(self) -> bool:
        """Run one item of the work list; False when nothing is left."""
        if not self.work:
            return False
        self._tick()
        item = self.work.pop()
        kind = item[0]
        try:
            if kind == _EXEC:
                self._exec(item[1], item[2])
            elif kind == _LOOP:
                self._loop(item)
            else:
                self._return()
        except RuntimeFailure as err:
            if err.loc is None and kind == _EXEC:
                loc = getattr(item[1], "loc", None)
                if loc is not None:
                    raise RuntimeFailure(err.reason, loc) from None
            raise
        return True

    def run_statement(self, stmt, env: Optional[dict] = None) -> dict:
        """Execute ``stmt`` to completion; returns the environment used."""
        env = {} if env is None else env
        base = len(self.work)
        self.work.append((_EXEC, stmt, env))
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 20000))
        work, exec_, loop = self.work, self._exec, self._loop
        budget = self.step_budget
        item = None
        try:
            while len(work) > base:
                self.steps += 1
                if self.steps > budget:
                    raise StepBudgetExceeded(budget)
                item = work.pop()
                kind = item[0]
                if kind == _EXEC:
                    exec_(item[1], item[2])
                elif kind == _LOOP:
                    loop(item)
                else:
                    self._return()
        except RuntimeFailure as err:
            if err.loc is None and item is not None and item[0] == _EXEC:
                loc = getattr(item[1], "loc", None)
                if loc is not None:
                    raise RuntimeFailure(err.reason, loc) from None
            raise
        finally:
            sys.setrecursionlimit(limit)
        return env

    def call(self, recv: Addr, method: str, *args) -> Any:
        """Invoke a method from outside the program; returns the value the
        method returned (None for methods without ``return``)."""
        obj = self.heap.objs.get(recv)
        if type(obj) is dict:
            obj.pop("$ret", None)
        stmt = A.MethodCall(A.Lit(recv), method, tuple(A.Lit(from_python(a)) for a in args))
        self.run_statement(stmt)
        return obj.get("$ret") if type(obj) is dict else None

    def run(self) -> RunResult:
        self.run_statement(self.program.main)
        return RunResult(self.steps, self.heap, self)

    # ------------------------------------------------------------ values

    def bind_global(self, name: str, value: Any) -> None:
        """Assign a global variable from outside the program.  Python sets and
        frozensets become fresh set objects; other values are converted."""
        if isinstance(value, (set, frozenset)):
            v = self.heap.new_set(from_python(x) for x in value)
        else:
            v = from_python(value)
        if not self.legal_assign(GLOBAL_ADDR, name):
            raise RuntimeFailure(f"illegal assignment to derived predicate {name}")
        self.heap.objs[GLOBAL_ADDR][name] = v
        self.maintain()

    def global_value(self, name: str, deep: bool = True) -> Any:
        obj = self.heap.objs[GLOBAL_ADDR]
        if name not in obj:
            raise KeyError(name)
        return self.resolve(obj[name]) if deep else obj[name]

    def resolve(self, v: Any, _depth: int = 0) -> Any:
        """Replace set and sequence addresses by their contents (frozenset and
        list); other addresses are kept."""
        if type(v) is Addr and _depth < 50:
            t = self.heap.types.get(v)
            if t == "set":
                return frozenset(self.resolve(x, _depth + 1) for x in self.heap.objs[v])
            if t == "sequence":
                return [self.resolve(x, _depth + 1) for x in self.heap.objs[v]]
        if type(v) is tuple:
            return tuple(self.resolve(x, _depth + 1) for x in v)
        return v

    def derived_check(self, snapshot: Optional[Dict[Addr, frozenset]] = None) -> List[str]:
        """Recompute every rule set on the stack from scratch and list the
        derived predicate variables whose heap value disagrees.  ``snapshot``
        maps set addresses to the contents they should be read with."""
        from ..engine import eval_naive
        from .maintain import _to_facts, _to_heap
        problems = []
        heap = self.heap
        expected: Dict[tuple, Any] = {}
        for frame in self.stack:
            layer = {}
            for inst in frame:
                p = self.inference.prepare(inst)
                known = []
                for pred in p.base_vars:
                    owner, name = field_of(pred)
                    obj = heap.objs.get(owner)
                    v = obj.get(name) if type(obj) is dict else None
                    if snapshot is not None and ("f", owner, name) in snapshot:
                        v = snapshot[("f", owner, name)]
                    if heap.is_set(v):
                        known.append((pred, v))
                sliced = R.slice_rules(inst.rules, [q for q, _ in known])
                facts = {}
                for pred, a in known:
                    content = snapshot.get(a, heap.objs[a]) if snapshot else heap.objs[a]
                    if pred in p.arity:
                        facts[pred] = _to_facts(content, p.arity[pred])
                out = eval_naive(sliced, facts) if sliced else None
                defined = {r.head.pred for r in sliced}
                for pred in p.derived_vars:
                    if pred in defined:
                        layer[field_of(pred)] = _to_heap(out.relation(pred), p.arity[pred])
                    else:
                        layer[field_of(pred)] = None
            expected.update(layer)
        for (owner, name), want in sorted(expected.items(), key=lambda kv: (kv[0][0].index, kv[0][1])):
            got = heap.objs[owner].get(name, _UNBOUND)
            if want is None:
                if got is not None:
                    problems.append(f"{owner!r}.{name}: expected None, found {got!r}")
            elif not heap.is_set(got) or frozenset(heap.objs[got]) != want:
                problems.append(f"{owner!r}.{name}: expected {sorted(want, key=canon_key)}")
        return problems


def _member(s: set, v) -> bool:
    """Membership by identity of values (True and 1 differ; tuples compare structurally)."""
    return v in s


def run_program(program: A.Program, mode: str = "no-alias", step_budget: int = DEFAULT_STEP_BUDGET,
                bindings: Optional[Dict[str, Any]] = None) -> RunResult:
    m = Machine(program, mode, step_budget)
    for name, value in (bindings or {}).items():
        m.bind_global(name, value)
    return m.run()
