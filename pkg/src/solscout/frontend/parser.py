"""Recursive-descent parser for the Solidity subset needed by the scanner.

The grammar coverage is deliberately partial: contracts, inheritance,
state variables, functions/constructors/modifiers, the statement forms
that matter for ordering/condition/dataflow checks, and ordinary
expressions. Anything else (assembly, try/catch, do-while innards that
fail, exotic syntax) degrades to an ``opaque`` statement that preserves
the exact source text, so nothing is ever silently dropped.
"""

from __future__ import annotations

import re

from ..errors import SoliditySyntaxError
from .lexer import Token, check_braces, strip_comments, tokenize
from .nodes import (
    ContractDef,
    Expression,
    FunctionRecord,
    ModifierDef,
    SourceFile,
    SourceUnit,
    Statement,
    VarDecl,
)

VISIBILITIES = {"public", "external", "internal", "private"}
MUTABILITY = {"view", "pure", "payable", "constant"}
LOCATIONS = {"memory", "storage", "calldata"}
UNITS = {"wei", "gwei", "szabo", "finney", "ether",
         "seconds", "minutes", "hours", "days", "weeks", "years"}
ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>=", "**="}
BINARY_LEVELS = (
    ("||",), ("&&",), ("==", "!="), ("<", ">", "<=", ">="),
    ("|",), ("^",), ("&",), ("<<", ">>"), ("+", "-"), ("*", "/", "%"), ("**",),
)
UNARY_OPS = {"!", "~", "-", "+", "++", "--"}

_ELEMENTARY_RE = re.compile(r"^(address|bool|string|byte|bytes\d*|u?int\d*|u?fixed\d*x?\d*)$")

_MAX_EXPR_DEPTH = 200


class _Backtrack(Exception):
    """Internal: current construct does not parse; caller falls back."""


class Parser:
    def __init__(self, src: SourceFile):
        self.src = src
        if not src.stripped:
            src.stripped = strip_comments(src.text, src.path)
        self.tokens = tokenize(src.stripped, src.path)
        check_braces(self.tokens, src.line_index, src.path)
        self.pos = 0
        self._expr_depth = 0

    # ------------------------------------------------------------------
    # token plumbing

    def peek(self, offset: int = 0) -> Token:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else self.tokens[-1]

    def advance(self) -> Token:
        tok = self.peek()
        if tok.type != "eof":
            self.pos += 1
        return tok

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok.type == "punct" and tok.value == value

    def at_id(self, value: str) -> bool:
        tok = self.peek()
        return tok.type == "id" and tok.value == value

    def _fail(self, message: str, tok: Token = None):
        tok = tok or self.peek()
        line, col = self.src.line_index.linecol(tok.start)
        raise SoliditySyntaxError(message, line, col, self.src.path)

    def expect_punct(self, value: str, hard: bool = False) -> Token:
        if self.at(value):
            return self.advance()
        if hard:
            self._fail(f"expected '{value}'")
        raise _Backtrack()

    def expect_id(self, what: str, hard: bool = False) -> Token:
        tok = self.peek()
        if tok.type == "id":
            return self.advance()
        if hard:
            self._fail(f"expected {what}")
        raise _Backtrack()

    def raw(self, start: int, end: int) -> str:
        return self.src.text[start:end]

    def lines(self, start: int, end: int) -> tuple[int, int]:
        idx = self.src.line_index
        return idx.line_of(start), idx.line_of(max(start, end - 1))

    # ------------------------------------------------------------------
    # top level

    def parse(self) -> SourceUnit:
        unit = SourceUnit(file=self.src)
        free: list[FunctionRecord] = []
        while self.peek().type != "eof":
            tok = self.peek()
            if tok.type == "id" and tok.value == "pragma":
                unit.pragmas.append(self._parse_pragma())
            elif tok.type == "id" and tok.value == "import":
                path = self._parse_import()
                if path:
                    unit.imports.append(path)
            elif tok.type == "id" and (
                tok.value in ("contract", "interface", "library")
                or (tok.value == "abstract" and self.peek(1).value == "contract")
            ):
                unit.contracts.append(self._parse_contract())
            elif tok.type == "id" and tok.value == "function":
                free.append(self._parse_function("contract"))
            else:
                self._skip_construct()
        if free:
            synthetic = ContractDef(name="", kind="contract", bases=[], functions=free)
            for fn in free:
                fn.contract_def = synthetic
            unit.contracts.append(synthetic)
        self._bind(unit)
        return unit

    def _bind(self, unit: SourceUnit) -> None:
        seen = set()
        for c in unit.contracts:
            if c.name in seen:
                # keep parsing usable; later analysis keys on (path, name)
                continue
            seen.add(c.name)
        for c in unit.contracts:
            for fn in c.functions:
                fn.contract = c.name
                fn.contract_def = c
                fn.file = self.src
                _assign_seq(fn)

    def _parse_pragma(self) -> str:
        self.advance()
        parts = []
        while not self.at(";") and self.peek().type != "eof":
            parts.append(self.advance().value)
        if self.at(";"):
            self.advance()
        return " ".join(parts)

    def _parse_import(self) -> str:
        self.advance()
        path = ""
        while not self.at(";") and self.peek().type != "eof":
            tok = self.advance()
            if tok.type == "str" and not path:
                path = tok.value[1:-1]
        if self.at(";"):
            self.advance()
        return path

    def _skip_construct(self) -> None:
        """Skip one unknown construct: to ';' or over one balanced block."""
        depth = 0
        while self.peek().type != "eof":
            tok = self.advance()
            if tok.type != "punct":
                continue
            if tok.value in "([":
                depth += 1
            elif tok.value in ")]":
                depth = max(0, depth - 1)
            elif tok.value == ";" and depth == 0:
                return
            elif tok.value == "{":
                self._skip_balanced_braces()
                # struct/enum bodies end here; a trailing ';' is optional
                if self.at(";"):
                    self.advance()
                return
            elif tok.value == "}":
                return

    def _skip_balanced_braces(self) -> None:
        """Consume tokens up to and including the matching '}'.

        The opening '{' must already be consumed.
        """
        depth = 1
        while depth and self.peek().type != "eof":
            tok = self.advance()
            if tok.type == "punct":
                if tok.value == "{":
                    depth += 1
                elif tok.value == "}":
                    depth -= 1

    def _skip_balanced_parens(self) -> None:
        if not self.at("("):
            return
        self.advance()
        depth = 1
        while depth and self.peek().type != "eof":
            tok = self.advance()
            if tok.type == "punct":
                if tok.value == "(":
                    depth += 1
                elif tok.value == ")":
                    depth -= 1

    # ------------------------------------------------------------------
    # contracts

    def _parse_contract(self) -> ContractDef:
        start = self.peek().start
        kind = self.advance().value
        if kind == "abstract":
            self.advance()  # 'contract'
            kind = "abstract"
        name = self.expect_id("contract name", hard=True).value
        bases: list[str] = []
        if self.at_id("is"):
            self.advance()
            while True:
                base = self.expect_id("base contract name", hard=True).value
                while self.at("."):
                    self.advance()
                    base += "." + self.expect_id("base name part", hard=True).value
                self._skip_balanced_parens()
                bases.append(base)
                if self.at(","):
                    self.advance()
                else:
                    break
        self.expect_punct("{", hard=True)
        contract = ContractDef(name=name, kind=kind, bases=bases)
        while not self.at("}") and self.peek().type != "eof":
            self._parse_member(contract)
        end = self.peek().end
        self.expect_punct("}", hard=True)
        contract.span = self.lines(start, end)
        return contract

    def _parse_member(self, contract: ContractDef) -> None:
        tok = self.peek()
        if tok.type != "id":
            self._skip_construct()
            return
        v = tok.value
        if v == "function" or v == "constructor" or (
            v in ("fallback", "receive") and self.peek(1).value == "("
        ):
            fn = self._parse_function(contract.kind)
            if fn.name == contract.name:
                fn.name = ""  # pre-0.5 constructor-by-name
                fn.kind = "constructor"
            contract.functions.append(fn)
        elif v == "modifier":
            contract.modifiers.append(self._parse_modifier())
        elif v in ("using", "event", "error", "type"):
            self._skip_construct()
        elif v in ("struct", "enum"):
            self._skip_construct()
        else:
            var = self._try_state_var()
            if var is not None:
                contract.state_vars.append(var)
            else:
                self._skip_construct()

    def _try_state_var(self):
        saved = self.pos
        start = self.peek().start
        try:
            type_text = self._parse_type()
            name = ""
            while not self.at(";") and self.peek().type != "eof":
                tok = self.peek()
                if tok.type == "id" and tok.value not in VISIBILITIES \
                        and tok.value not in ("constant", "immutable", "override", "public",
                                              "internal", "private"):
                    name = tok.value
                    self.advance()
                    break
                if tok.type == "id":
                    self.advance()
                    continue
                raise _Backtrack()
            if not name:
                raise _Backtrack()
            if self.at("="):
                self.advance()
                self._parse_expression()
            end = self.peek().end
            self.expect_punct(";")
            return VarDecl(name=name, type_text=type_text, span=self.lines(start, end))
        except _Backtrack:
            self.pos = saved
            return None

    def _parse_modifier(self) -> ModifierDef:
        start = self.peek().start
        self.advance()
        name = self.expect_id("modifier name", hard=True).value
        params = []
        if self.at("("):
            params = self._parse_params()
        while self.peek().type == "id" and self.peek().value in ("virtual", "override"):
            self.advance()
            self._skip_balanced_parens()
        body: list[Statement] = []
        if self.at(";"):
            end = self.advance().end
        else:
            body, end = self._parse_block_children()
        return ModifierDef(name=name, params=params, span=self.lines(start, end), body=body)

    # ------------------------------------------------------------------
    # functions

    def _parse_function(self, contract_kind: str) -> FunctionRecord:
        start = self.peek().start
        kw = self.advance().value
        if kw == "function":
            kind = "function"
            name = "" if self.at("(") else self.expect_id("function name", hard=True).value
        else:
            kind = kw if kw != "constructor" else "constructor"
            name = ""
        params = self._parse_params()
        visibility = None
        modifiers: list[str] = []
        returns: list[str] = []
        while self.peek().type != "eof":
            tok = self.peek()
            if self.at("{") or self.at(";"):
                break
            if tok.type != "id":
                self.advance()  # stray punctuation in header: skip, stay total
                continue
            v = tok.value
            if v in VISIBILITIES:
                visibility = v
                self.advance()
            elif v in MUTABILITY or v == "virtual":
                self.advance()
            elif v == "override":
                self.advance()
                self._skip_balanced_parens()
            elif v == "returns":
                self.advance()
                returns = self._parse_return_types()
            else:
                modifiers.append(v)
                self.advance()
                self._skip_balanced_parens()
        if visibility is None:
            visibility = "external" if contract_kind == "interface" else "public"
        if self.at(";"):
            end = self.advance().end
            body = None
        else:
            body, end = self._parse_block_children()
        return FunctionRecord(
            name=name,
            kind=kind,
            params=params,
            returns=returns,
            visibility=visibility,
            modifiers=modifiers,
            body=body,
            span=self.lines(start, end),
            start=start,
            end=end,
        )

    def _parse_params(self) -> list:
        params = []
        self.expect_punct("(", hard=True)
        while not self.at(")") and self.peek().type != "eof":
            saved = self.pos
            entry_start = self.peek().start
            try:
                type_text = self._parse_type()
                if self.peek().type == "id" and self.peek().value in LOCATIONS:
                    self.advance()
                name = ""
                if self.peek().type == "id":
                    name = self.advance().value
                params.append((type_text, name))
            except _Backtrack:
                # salvage the raw text so arity stays right
                self.pos = saved
                depth = 0
                while self.peek().type != "eof":
                    if self.at(",") and depth == 0 or self.at(")") and depth == 0:
                        break
                    tok = self.advance()
                    if tok.type == "punct" and tok.value in "([":
                        depth += 1
                    elif tok.type == "punct" and tok.value in ")]":
                        depth -= 1
                raw = self.src.stripped[entry_start: self.peek().start].strip()
                params.append((raw, ""))
            if self.at(","):
                self.advance()
        self.expect_punct(")", hard=True)
        return params

    def _parse_return_types(self) -> list:
        types = []
        self.expect_punct("(", hard=True)
        while not self.at(")") and self.peek().type != "eof":
            try:
                type_text = self._parse_type()
            except _Backtrack:
                type_text = self.advance().value
            if self.peek().type == "id" and self.peek().value in LOCATIONS:
                self.advance()
            if self.peek().type == "id":
                self.advance()  # named return value
            types.append(type_text)
            if self.at(","):
                self.advance()
        self.expect_punct(")", hard=True)
        return types

    def _parse_type(self) -> str:
        tok = self.peek()
        if tok.type != "id":
            raise _Backtrack()
        if tok.value == "mapping":
            self.advance()
            self.expect_punct("(")
            key = self._parse_type()
            if self.peek().type == "id":
                self.advance()  # named mapping key (0.8.18+)
            self.expect_punct("=>")
            value = self._parse_type()
            if self.peek().type == "id":
                self.advance()
            self.expect_punct(")")
            text = f"mapping({key}=>{value})"
        elif tok.value == "function":
            self.advance()
            self._skip_balanced_parens()
            while self.peek().type == "id" and (
                self.peek().value in VISIBILITIES or self.peek().value in MUTABILITY
            ):
                self.advance()
            if self.at_id("returns"):
                self.advance()
                self._skip_balanced_parens()
            text = "function"
        else:
            parts = [self.advance().value]
            while self.at(".") and self.peek(1).type == "id":
                self.advance()
                parts.append(self.advance().value)
            text = ".".join(parts)
            if text == "address" and self.at_id("payable"):
                self.advance()
        while self.at("["):
            self.advance()
            inner = []
            depth = 0
            while self.peek().type != "eof":
                if self.at("]") and depth == 0:
                    break
                t = self.advance()
                if t.type == "punct" and t.value == "[":
                    depth += 1
                elif t.type == "punct" and t.value == "]":
                    depth -= 1
                inner.append(t.value)
            self.expect_punct("]")
            text += "[" + "".join(inner) + "]"
        return text

    # ------------------------------------------------------------------
    # statements

    def _parse_block_children(self) -> tuple[list, int]:
        self.expect_punct("{", hard=True)
        children = []
        while not self.at("}") and self.peek().type != "eof":
            children.append(self._parse_statement())
        end = self.peek().end
        self.expect_punct("}", hard=True)
        return children, end

    def _statement(self, kind: str, start: int, end: int, **kw) -> Statement:
        return Statement(
            kind=kind,
            start=start,
            end=end,
            span=self.lines(start, end),
            raw=self.raw(start, end),
            **kw,
        )

    def _parse_statement(self) -> Statement:
        saved = self.pos
        try:
            return self._statement_dispatch()
        except _Backtrack:
            self.pos = saved
            return self._opaque_statement()

    def _opaque_statement(self) -> Statement:
        start = self.peek().start
        consumed = False
        depth = 0
        while self.peek().type != "eof":
            if self.at("}") and depth == 0:
                break
            tok = self.advance()
            consumed = True
            if tok.type != "punct":
                continue
            if tok.value in "([":
                depth += 1
            elif tok.value in ")]":
                depth = max(0, depth - 1)
            elif tok.value == ";" and depth == 0:
                break
            elif tok.value == "{" and depth == 0:
                self._skip_balanced_braces()
                break
        if not consumed:
            self.advance()
        end = self.tokens[self.pos - 1].end if self.pos else start
        return self._statement("opaque", start, max(start, end))

    def _statement_dispatch(self) -> Statement:
        tok = self.peek()
        if tok.type == "punct" and tok.value == "{":
            start = tok.start
            children, end = self._parse_block_children()
            return self._statement("block", start, end, children=children)
        if tok.type == "id":
            handler = {
                "if": self._parse_if,
                "for": self._parse_for,
                "while": self._parse_while,
                "do": self._parse_do_while,
                "return": self._parse_return,
                "emit": self._parse_emit,
                "revert": self._parse_revert,
                "assembly": self._parse_assembly,
                "try": self._parse_try,
            }.get(tok.value)
            if handler is not None:
                return handler()
            if tok.value in ("require", "assert") and self.peek(1).value == "(":
                return self._parse_require(tok.value)
            if tok.value == "unchecked" and self.peek(1).value == "{":
                start = self.advance().start
                children, end = self._parse_block_children()
                return self._statement("block", start, end, children=children)
            if tok.value in ("break", "continue", "throw"):
                start = self.advance().start
                end = self.expect_punct(";").end
                return self._statement("opaque", start, end)
        saved = self.pos
        try:
            return self._parse_local_decl()
        except _Backtrack:
            self.pos = saved
        return self._parse_expression_statement()

    def _parse_if(self) -> Statement:
        start = self.advance().start
        self.expect_punct("(")
        cond = self._parse_expression()
        self.expect_punct(")")
        then = self._parse_statement()
        children = [then]
        end = then.end
        if self.at_id("else"):
            self.advance()
            other = self._parse_statement()
            children.append(other)
            end = other.end
        return self._statement("if", start, end, condition=cond, children=children)

    def _parse_for(self) -> Statement:
        start = self.advance().start
        self.expect_punct("(")
        children = []
        if self.at(";"):
            self.advance()
        else:
            saved = self.pos
            try:
                children.append(self._parse_local_decl())
            except _Backtrack:
                self.pos = saved
                init = self._parse_expression()
                end_tok = self.expect_punct(";")
                children.append(
                    self._statement("expression", init.start, end_tok.end, exprs=[init])
                )
        cond = None
        if self.at(";"):
            self.advance()
        else:
            cond = self._parse_expression()
            self.expect_punct(";")
        post = None
        if not self.at(")"):
            post = self._parse_expression()
        self.expect_punct(")")
        body = self._parse_statement()
        children.append(body)
        return self._statement(
            "for", start, body.end, condition=cond, children=children, post_expr=post
        )

    def _parse_while(self) -> Statement:
        start = self.advance().start
        self.expect_punct("(")
        cond = self._parse_expression()
        self.expect_punct(")")
        body = self._parse_statement()
        return self._statement("while", start, body.end, condition=cond, children=[body])

    def _parse_do_while(self) -> Statement:
        start = self.advance().start
        body = self._parse_statement()
        if not self.at_id("while"):
            raise _Backtrack()
        self.advance()
        self.expect_punct("(")
        cond = self._parse_expression()
        self.expect_punct(")")
        end = self.expect_punct(";").end
        return self._statement("while", start, end, condition=cond, children=[body])

    def _parse_require(self, which: str) -> Statement:
        start = self.advance().start
        args = self._parse_call_args()
        end = self.expect_punct(";").end
        cond = args[0] if args else None
        return self._statement(which, start, end, condition=cond, exprs=args)

    def _parse_revert(self) -> Statement:
        start = self.advance().start
        exprs = []
        if self.at("("):
            exprs = self._parse_call_args()
        elif self.peek().type == "id":
            exprs = [self._parse_expression()]
        end = self.expect_punct(";").end
        return self._statement("revert", start, end, exprs=exprs)

    def _parse_return(self) -> Statement:
        start = self.advance().start
        exprs = []
        if not self.at(";"):
            exprs = [self._parse_expression()]
        end = self.expect_punct(";").end
        return self._statement("return", start, end, exprs=exprs)

    def _parse_emit(self) -> Statement:
        start = self.advance().start
        expr = self._parse_expression()
        end = self.expect_punct(";").end
        return self._statement("emit", start, end, exprs=[expr])

    def _parse_assembly(self) -> Statement:
        start = self.advance().start
        if self.peek().type == "str":
            self.advance()
        if not self.at("{"):
            raise _Backtrack()
        self.advance()
        self._skip_balanced_braces()
        end = self.tokens[self.pos - 1].end
        return self._statement("opaque", start, end)

    def _parse_try(self) -> Statement:
        start = self.advance().start
        self._parse_expression()
        if self.at_id("returns"):
            self.advance()
            self._skip_balanced_parens()
        if not self.at("{"):
            raise _Backtrack()
        self.advance()
        self._skip_balanced_braces()
        while self.at_id("catch"):
            self.advance()
            if self.peek().type == "id" and not self.at("{"):
                self.advance()
            self._skip_balanced_parens()
            if not self.at("{"):
                raise _Backtrack()
            self.advance()
            self._skip_balanced_braces()
        end = self.tokens[self.pos - 1].end
        return self._statement("opaque", start, end)

    def _parse_local_decl(self) -> Statement:
        start = self.peek().start
        if self.at("("):
            # tuple declaration: (uint a, , uint b) = expr;
            self.advance()
            names = []
            saw_type = False
            while not self.at(")"):
                if self.at(","):
                    self.advance()
                    continue
                self._parse_type()
                saw_type = True
                if self.peek().type == "id" and self.peek().value in LOCATIONS:
                    self.advance()
                names.append(self.expect_id("variable name").value)
                if self.at(","):
                    self.advance()
            self.expect_punct(")")
            if not saw_type:
                raise _Backtrack()
            self.expect_punct("=")
            rhs = self._parse_expression()
            end = self.expect_punct(";").end
            return self._statement("local-decl", start, end, decl_names=names, exprs=[rhs])
        self._parse_type()
        if self.peek().type == "id" and self.peek().value in LOCATIONS:
            self.advance()
        name = self.expect_id("variable name").value
        exprs = []
        if self.at("="):
            self.advance()
            exprs = [self._parse_expression()]
        end = self.expect_punct(";").end
        return self._statement("local-decl", start, end, decl_names=[name], exprs=exprs)

    def _parse_expression_statement(self) -> Statement:
        start = self.peek().start
        expr = self._parse_expression()
        end = self.expect_punct(";").end
        if expr.kind == "binary" and expr.op in ASSIGN_OPS:
            return self._statement("assignment", start, end, exprs=[expr.args[0], expr.args[1]])
        return self._statement("expression", start, end, exprs=[expr])

    # ------------------------------------------------------------------
    # expressions

    def _expr(self, kind: str, start: int, end: int, **kw) -> Expression:
        return Expression(kind=kind, start=start, end=end, raw=self.raw(start, end), **kw)

    def _parse_expression(self) -> Expression:
        self._expr_depth += 1
        try:
            if self._expr_depth > _MAX_EXPR_DEPTH:
                raise _Backtrack()
            return self._parse_assign()
        finally:
            self._expr_depth -= 1

    def _parse_assign(self) -> Expression:
        left = self._parse_ternary()
        tok = self.peek()
        if tok.type == "punct" and tok.value in ASSIGN_OPS:
            self.advance()
            right = self._parse_assign()
            return self._expr("binary", left.start, right.end,
                              op=tok.value, args=[left, right])
        return left

    def _parse_ternary(self) -> Expression:
        cond = self._parse_binary(0)
        if self.at("?"):
            self.advance()
            then = self._parse_expression()
            self.expect_punct(":")
            other = self._parse_expression()
            return self._expr("binary", cond.start, other.end,
                              op="?:", args=[cond, then, other])
        return cond

    def _parse_binary(self, level: int) -> Expression:
        if level >= len(BINARY_LEVELS):
            return self._parse_unary()
        ops = BINARY_LEVELS[level]
        left = self._parse_binary(level + 1)
        while True:
            tok = self.peek()
            if tok.type != "punct" or tok.value not in ops:
                return left
            self.advance()
            right = self._parse_binary(level + 1)
            left = self._expr("binary", left.start, right.end,
                              op=tok.value, args=[left, right])

    def _parse_unary(self) -> Expression:
        tok = self.peek()
        if tok.type == "punct" and tok.value in UNARY_OPS:
            self.advance()
            operand = self._parse_unary()
            return self._expr("unary", tok.start, operand.end, op=tok.value, args=[operand])
        if tok.type == "id" and tok.value in ("delete", "new"):
            self.advance()
            operand = self._parse_unary()
            return self._expr("unary", tok.start, operand.end, op=tok.value, args=[operand])
        return self._parse_postfix(self._parse_primary())

    def _parse_postfix(self, base: Expression) -> Expression:
        while True:
            tok = self.peek()
            if tok.type != "punct":
                return base
            if tok.value == "(":
                args = self._parse_call_args()
                end = self.tokens[self.pos - 1].end
                base = self._expr("call", base.start, end, callee=base, args=args)
            elif tok.value == "{" and self._looks_like_call_options():
                opts = self._parse_named_values()
                if not self.at("("):
                    raise _Backtrack()
                args = self._parse_call_args()
                end = self.tokens[self.pos - 1].end
                base = self._expr("call", base.start, end, callee=base, args=args + opts)
            elif tok.value == ".":
                self.advance()
                name_tok = self.peek()
                if name_tok.type not in ("id", "num"):
                    raise _Backtrack()
                self.advance()
                base = self._expr("member-access", base.start, name_tok.end,
                                  callee=base, name=name_tok.value)
            elif tok.value == "[":
                self.advance()
                args = []
                if not self.at("]") and not self.at(":"):
                    args.append(self._parse_expression())
                if self.at(":"):
                    self.advance()
                    if not self.at("]"):
                        args.append(self._parse_expression())
                end = self.expect_punct("]").end
                base = self._expr("index", base.start, end, callee=base, args=args)
            elif tok.value in ("++", "--"):
                self.advance()
                base = self._expr("unary", base.start, tok.end, op=tok.value, args=[base])
            else:
                return base

    def _looks_like_call_options(self) -> bool:
        # '{' ident ':' ... '}' '('  — distinguishes f{value: x}(...) from blocks
        return self.peek(1).type == "id" and self.peek(2).value == ":"

    def _parse_named_values(self) -> list:
        self.expect_punct("{")
        values = []
        while not self.at("}") and self.peek().type != "eof":
            self.expect_id("option name")
            self.expect_punct(":")
            values.append(self._parse_expression())
            if self.at(","):
                self.advance()
        self.expect_punct("}")
        return values

    def _parse_call_args(self) -> list:
        self.expect_punct("(")
        args = []
        while not self.at(")") and self.peek().type != "eof":
            args.append(self._parse_expression())
            if self.at(","):
                self.advance()
        self.expect_punct(")")
        return args

    def _parse_primary(self) -> Expression:
        tok = self.peek()
        if tok.type == "id":
            self.advance()
            return self._expr("identifier", tok.start, tok.end, name=tok.value)
        if tok.type == "num":
            self.advance()
            end = tok.end
            if self.peek().type == "id" and self.peek().value in UNITS:
                end = self.advance().end
            return self._expr("literal", tok.start, end)
        if tok.type == "str":
            self.advance()
            end = tok.end
            while self.peek().type == "str":  # adjacent string concatenation
                end = self.advance().end
            return self._expr("literal", tok.start, end)
        if tok.type == "punct" and tok.value == "(":
            self.advance()
            elems = []
            expect_elem = True
            while not self.at(")") and self.peek().type != "eof":
                if self.at(","):
                    if expect_elem:
                        elems.append(None)
                    self.advance()
                    expect_elem = True
                    continue
                elems.append(self._parse_expression())
                expect_elem = False
            end = self.expect_punct(")").end
            real = [e for e in elems if e is not None]
            if len(elems) == 1 and len(real) == 1:
                return real[0]
            return self._expr("tuple", tok.start, end, args=elems)
        if tok.type == "punct" and tok.value == "[":
            self.advance()
            elems = []
            while not self.at("]") and self.peek().type != "eof":
                elems.append(self._parse_expression())
                if self.at(","):
                    self.advance()
            end = self.expect_punct("]").end
            return self._expr("tuple", tok.start, end, args=elems)
        if tok.type == "punct" and tok.value == "{":
            values = self._parse_named_values()
            end = self.tokens[self.pos - 1].end
            return self._expr("tuple", tok.start, end, args=values)
        raise _Backtrack()


def _assign_seq(fn: FunctionRecord) -> None:
    for i, stmt in enumerate(fn.statements()):
        stmt.seq = i


def parse_source(src: SourceFile) -> SourceUnit:
    """Parse one file. Raises SoliditySyntaxError; never anything else."""
    try:
        return Parser(src).parse()
    except SoliditySyntaxError:
        raise
    except RecursionError:
        raise SoliditySyntaxError("nesting too deep", 1, 1, src.path) from None
    except Exception as exc:  # totality: a parse either succeeds or raises SyntaxError
        raise SoliditySyntaxError(f"parse failure: {exc}", 1, 1, src.path) from exc


def parse_text(text: str, path: str = "<memory>") -> SourceUnit:
    return parse_source(SourceFile(path=path, text=text))


def enumerate_functions(unit: SourceUnit) -> list:
    """All functions across all contracts, in declaration order."""
    out = []
    for contract in unit.contracts:
        out.extend(contract.functions)
    return out
