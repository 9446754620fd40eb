"""Shannon-type LP outer bounds over a problem's variables, exactly.

The LP lives in the entropy space of the problem's variables: sessions,
distinct edge messages (duplicator edges collapse onto their parent), and
optionally one randomness variable per node.  Constraint families:

- elemental Shannon inequalities over the ground,
- causality: every message is a function of its tail's incident variables,
- decodability: every demanded session is a function of its sink's inputs,
- capacity: h(message) bounded by each finite capacity on its edge chain,
- rates: h(session) at least the session rate,
- secrecy: zero mutual information per wiretap,
- independence: sessions and node randomness are mutually independent,
- caller-supplied axioms (for subnetwork analysis or extra inequalities).

Functional-dependency equalities (causality, decodability) let subsets be
merged: in the Shannon cone with h(W|inputs) = 0, every subset has the
same entropy as its dependency closure.  The LP is therefore built over
closed subsets only, which shrinks it by orders of magnitude without
changing the feasible set or any optimum (`reduce=False` keeps the raw
2^n - 1 coordinates for cross-checks on small grounds).

Solving is exact rational simplex with Bland's rule; every certificate is
re-verified by substitution before it is returned.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from entroflow.entropy import (
    GroundSet,
    JointDistribution,
    LinearFunctional,
    as_fraction,
    subset_entropy,
)
from entroflow.network import NetworkProblem, ancestral_order, validate
from entroflow.simplex import (
    CertificateError,
    ExactSimplex,
    LinearRow,
    SimplexCertificate,
    verify_certificate,
)

__all__ = [
    "GroundTooLargeError",
    "VariableGround",
    "TaggedConstraint",
    "ShannonLP",
    "Certificate",
    "Claim",
    "ChainVerdict",
    "ChainReport",
    "ShannonSolver",
    "compile_expression",
    "build_shannon_lp",
    "maximize",
    "minimize",
    "feasibility",
    "prove_forced_equality",
    "verify_proof_chain",
    "export_text",
    "satisfies",
    "certificate_to_json",
]

DEFAULT_GROUND_LIMIT = 14


class GroundTooLargeError(ValueError):
    def __init__(self, size: int, limit: int):
        super().__init__(
            f"variable ground of size {size} exceeds the limit {limit}; "
            "designate a subnetwork variable set instead"
        )
        self.size = size
        self.limit = limit


@dataclass(frozen=True)
class VariableGround:
    ground: GroundSet
    kinds: Mapping[str, str]  # label -> "session" | "message" | "randomness"


@dataclass(frozen=True)
class TaggedConstraint:
    """sum(coeff * h(mask)) sense rhs, with a provenance tag."""

    coeffs: tuple[tuple[int, Fraction], ...]
    sense: str  # "ge" | "le" | "eq"
    rhs: Fraction
    tag: tuple[str, ...]

    def value_at(self, lookup) -> Fraction:
        return sum((c * lookup(m) for m, c in self.coeffs), Fraction(0))


@dataclass(frozen=True)
class ShannonLP:
    variables: VariableGround
    closures: tuple[int, ...]  # closure of every mask (index = mask)
    coords: tuple[int, ...]  # distinct closed masks, ascending
    constraints: tuple[TaggedConstraint, ...]
    reduced: bool

    @property
    def ground(self) -> GroundSet:
        return self.variables.ground

    def closure(self, mask: int) -> int:
        return self.closures[mask]

    def coord_index(self) -> dict[int, int]:
        return {m: i for i, m in enumerate(self.coords)}

    def compile(self, expr: Union[str, Mapping]) -> tuple[dict[int, Fraction], Fraction]:
        """Compile an expression to closed-coordinate coefficients."""
        if isinstance(expr, str):
            raw, const, _ = _parse_expression(self.ground, expr)
        else:
            raw, const = {self.ground.mask_of(k): as_fraction(v) for k, v in expr.items()}, Fraction(0)
        out: dict[int, Fraction] = {}
        for mask, c in raw.items():
            cl = self.closures[mask]
            if cl:
                out[cl] = out.get(cl, Fraction(0)) + c
        return {m: c for m, c in out.items() if c}, const


# ----------------------------------------------------------------------
# expression mini-language

_DELIMS = set("+-*(),;|")


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _DELIMS:
            tokens.append(ch)
            i += 1
            continue
        j = i
        while j < len(text) and not text[j].isspace() and text[j] not in _DELIMS:
            j += 1
        tokens.append(text[i:j])
        i = j
    return tokens


def _is_rational(token: str) -> bool:
    try:
        Fraction(token)
        return True
    except (ValueError, ZeroDivisionError):
        return False


class _Parser:
    def __init__(self, ground: GroundSet, text: str):
        self.ground = ground
        self.tokens = _tokenize(text)
        self.pos = 0
        self.atoms: list[tuple[Fraction, str]] = []  # (coefficient, kind) per atom

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of expression")
        if expected is not None and tok != expected:
            raise ValueError(f"expected {expected!r}, found {tok!r}")
        self.pos += 1
        return tok

    def varlist(self) -> int:
        names = [self.take()]
        while self.peek() == ",":
            self.take(",")
            names.append(self.take())
        return self.ground.mask_of(names)

    def atom(self, sign: Fraction, coeffs: dict[int, Fraction]) -> Fraction:
        """Parses one H(...)/I(...) atom or a rational; returns added constant."""
        tok = self.take()
        if tok == "H":
            self.take("(")
            a = self.varlist()
            b = 0
            if self.peek() == "|":
                self.take("|")
                b = self.varlist()
            self.take(")")
            _add(coeffs, a | b, sign)
            _add(coeffs, b, -sign)
            self.atoms.append((sign, "H"))
            return Fraction(0)
        if tok == "I":
            self.take("(")
            a = self.varlist()
            self.take(";")
            b = self.varlist()
            c = 0
            if self.peek() == "|":
                self.take("|")
                c = self.varlist()
            self.take(")")
            _add(coeffs, a | c, sign)
            _add(coeffs, b | c, sign)
            _add(coeffs, a | b | c, -sign)
            _add(coeffs, c, -sign)
            self.atoms.append((sign, "I"))
            return Fraction(0)
        if _is_rational(tok):
            self.atoms.append((sign, "const"))
            return sign * Fraction(tok)
        raise ValueError(f"unexpected token {tok!r} in expression")

    def term(self, sign: Fraction, coeffs: dict[int, Fraction]) -> Fraction:
        tok = self.peek()
        if tok is not None and _is_rational(tok) and self.pos + 1 < len(self.tokens) and self.tokens[self.pos + 1] == "*":
            factor = Fraction(self.take())
            self.take("*")
            return self.atom(sign * factor, coeffs)
        return self.atom(sign, coeffs)

    def parse(self) -> tuple[dict[int, Fraction], Fraction]:
        coeffs: dict[int, Fraction] = {}
        constant = Fraction(0)
        sign = Fraction(1)
        if self.peek() in ("+", "-"):
            sign = Fraction(-1) if self.take() == "-" else Fraction(1)
        constant += self.term(sign, coeffs)
        while self.peek() in ("+", "-"):
            sign = Fraction(-1) if self.take() == "-" else Fraction(1)
            constant += self.term(sign, coeffs)
        if self.peek() is not None:
            raise ValueError(f"trailing tokens at {self.peek()!r}")
        return coeffs, constant


def _add(coeffs: dict[int, Fraction], mask: int, c: Fraction) -> None:
    if mask == 0 or c == 0:
        return
    coeffs[mask] = coeffs.get(mask, Fraction(0)) + c


def _parse_expression(
    ground: GroundSet, text: str
) -> tuple[dict[int, Fraction], Fraction, list[tuple[Fraction, str]]]:
    parser = _Parser(ground, text)
    coeffs, constant = parser.parse()
    return {m: c for m, c in coeffs.items() if c}, constant, parser.atoms


def compile_expression(
    ground: GroundSet, text: str
) -> tuple[dict[int, Fraction], Fraction]:
    """Compile "H(A|B)", "I(A;B|C)", and rational combinations of them.

    Returns raw-subset coefficients plus a constant term.
    """
    coeffs, constant, _ = _parse_expression(ground, text)
    return coeffs, constant


def expression_is_elemental_nonnegative(ground: GroundSet, text: str) -> bool:
    """Syntactic check: a positive combination of H(.|.) and I(.;.|.) atoms."""
    _, constant, atoms = _parse_expression(ground, text)
    if constant != 0:
        return False
    return all(kind in ("H", "I") and sign > 0 for sign, kind in atoms)


# ----------------------------------------------------------------------
# LP construction


def _ground_of(
    problem: NetworkProblem,
    include_randomness: bool,
    variables: Optional[Sequence[str]],
) -> VariableGround:
    net = problem.network
    sessions = sorted(s.id for s in problem.requirement.sessions)
    messages = [
        name
        for name in ancestral_order(problem)
        if name not in sessions and net.edge(name).forwards is None
    ]
    if include_randomness:
        nodes = problem.randomness_nodes or tuple(
            sorted({e.tail for e in net.edges if e.forwards is None})
        )
        randomness = [f"V_{node}" for node in sorted(nodes)]
    else:
        randomness = []
    labels = list(sessions) + messages + randomness
    kinds = {s: "session" for s in sessions}
    kinds.update({m: "message" for m in messages})
    kinds.update({v: "randomness" for v in randomness})
    if variables is not None:
        wanted = set(variables)
        unknown = wanted - set(labels)
        if unknown:
            raise KeyError(f"unknown subnetwork variables {sorted(unknown)}")
        labels = [lab for lab in labels if lab in wanted]
        kinds = {lab: kinds[lab] for lab in labels}
    return VariableGround(GroundSet(tuple(labels)), kinds)


def _dependency_rules(
    problem: NetworkProblem, vg: VariableGround
) -> list[tuple[int, int, tuple[str, ...]]]:
    """(premise mask, target mask, tag) rules over the LP ground.

    A rule is emitted only when the target and its entire input list are
    ground variables; anything else would weaken the premise unsoundly.
    """
    net = problem.network
    ground = vg.ground
    labels = set(ground.labels)
    rules: list[tuple[int, int, tuple[str, ...]]] = []
    randomized = {lab[2:] for lab in labels if vg.kinds.get(lab) == "randomness"}
    for name in ancestral_order(problem):
        if name not in labels or vg.kinds[name] != "message":
            continue
        edge = net.edge(name)
        inputs: list[str] = []
        ok = True
        for s in problem.requirement.sessions:
            if s.origin == edge.tail:
                inputs.append(s.id)
        for inc in net.in_edges(edge.tail):
            inputs.append(net.message_of(inc.id))
        if edge.tail in randomized:
            inputs.append(f"V_{edge.tail}")
        for dep in inputs:
            if dep not in labels:
                ok = False
        if ok:
            rules.append(
                (ground.mask_of(dict.fromkeys(inputs)), ground.mask_of([name]), ("causality", name))
            )
    for sink, demanded in problem.demands().items():
        inputs = []
        ok = True
        for inc in net.in_edges(sink):
            inputs.append(net.message_of(inc.id))
        for s in problem.requirement.sessions:
            if s.origin == sink:
                inputs.append(s.id)
        for dep in inputs:
            if dep not in labels:
                ok = False
        if not ok:
            continue
        premise = ground.mask_of(dict.fromkeys(inputs))
        for sid in demanded:
            if sid in labels and sid not in inputs:
                rules.append((premise, ground.mask_of([sid]), ("decode", sink, sid)))
    return rules


def _closure_table(n: int, rules: Sequence[tuple[int, int, tuple]]) -> tuple[int, ...]:
    pairs = [(p, t) for p, t, _ in rules]
    out = [0] * (1 << n)
    for mask in range(1 << n):
        m = mask
        changed = True
        while changed:
            changed = False
            for p, t in pairs:
                if p & m == p and t & m != t:
                    m |= t
                    changed = True
        out[mask] = m
    return tuple(out)


def build_shannon_lp(
    problem: NetworkProblem,
    include_randomness: Optional[bool] = None,
    variables: Optional[Sequence[str]] = None,
    rate_sessions: Union[str, Sequence[str]] = "all",
    axioms: Sequence[tuple[str, str, str, Union[Fraction, int, str]]] = (),
    reduce: bool = True,
    ground_limit: int = DEFAULT_GROUND_LIMIT,
) -> ShannonLP:
    """Shannon outer-bound LP for a problem (feasibility form, no objective).

    `axioms` entries are (name, expression, relation, value) with relation
    one of "=", ">=", "<="; they are imported with provenance tag "axiom"
    (used for subnetwork analysis and for extra, e.g. non-Shannon,
    inequalities).  `rate_sessions` selects which session rates become
    constraints ("all", "none", or an explicit collection).
    """
    errors = validate(problem)
    if errors:
        raise ValueError("invalid problem: " + "; ".join(errors))
    if include_randomness is None:
        include_randomness = bool(problem.randomness_nodes)
    vg = _ground_of(problem, include_randomness, variables)
    ground = vg.ground
    n = ground.size
    if n > ground_limit:
        raise GroundTooLargeError(n, ground_limit)
    rules = _dependency_rules(problem, vg)
    closures = _closure_table(n, rules) if reduce else tuple(range(1 << n))

    def cl(mask: int) -> int:
        return closures[mask]

    rows: list[TaggedConstraint] = []
    seen: set = set()

    def push(coeffs: dict[int, Fraction], sense: str, rhs: Fraction, tag: tuple) -> None:
        coeffs = {m: c for m, c in coeffs.items() if c and m}
        if not coeffs:
            return  # trivially 0 (sense) rhs; nothing to assert for rhs = 0
        key = (sense, rhs, tuple(sorted(coeffs.items())))
        if key in seen:
            return
        seen.add(key)
        rows.append(TaggedConstraint(tuple(sorted(coeffs.items())), sense, rhs, tag))

    one = Fraction(1)
    full = ground.full_mask
    # The closure of the empty set is a constant tuple; pin it to zero.
    if cl(0):
        push({cl(0): one}, "eq", Fraction(0), ("causality", "nullary"))
    # Elemental inequalities, mapped through the closure.
    for i in range(n):
        coeffs: dict[int, Fraction] = {}
        _add(coeffs, cl(full), one)
        _add(coeffs, cl(full & ~(1 << i)), -one)
        push(coeffs, "ge", Fraction(0), ("elemental", f"H({ground.labels[i]}|rest)"))
    for i in range(n):
        for j in range(i + 1, n):
            others = [k for k in range(n) if k != i and k != j]
            li, lj = ground.labels[i], ground.labels[j]
            for bits in range(1 << len(others)):
                kmask = 0
                for t, k in enumerate(others):
                    if bits >> t & 1:
                        kmask |= 1 << k
                coeffs = {}
                _add(coeffs, cl(kmask | 1 << i), one)
                _add(coeffs, cl(kmask | 1 << j), one)
                _add(coeffs, cl(kmask | 1 << i | 1 << j), -one)
                _add(coeffs, cl(kmask), -one)
                push(
                    coeffs,
                    "ge",
                    Fraction(0),
                    ("elemental", f"I({li};{lj}|{ground.format_subset(kmask)})"),
                )
    # Causality and decodability: folded into the closure when reducing,
    # explicit equalities otherwise.
    if not reduce:
        for premise, target, tag in rules:
            coeffs = {}
            _add(coeffs, premise | target, one)
            _add(coeffs, premise, -one)
            push(coeffs, "eq", Fraction(0), tag)
    # Capacities: every finite capacity along a message's edge chain binds.
    net = problem.network
    labels = set(ground.labels)
    for e in net.edges:
        if e.capacity.is_unbounded:
            continue
        msg = net.message_of(e.id)
        if msg in labels and vg.kinds[msg] == "message":
            push(
                {cl(ground.mask_of([msg])): one},
                "le",
                e.capacity.value,
                ("capacity", e.id),
            )
    # Rates.
    if rate_sessions == "all":
        rated = [s.id for s in problem.requirement.sessions]
    elif rate_sessions == "none":
        rated = []
    else:
        rated = list(rate_sessions)
    for s in sorted(problem.requirement.sessions, key=lambda s: s.id):
        if s.id in labels and s.id in rated:
            push({cl(ground.mask_of([s.id])): one}, "ge", s.rate, ("rate", s.id))
    # Secrecy.
    for r, tap in enumerate(problem.wiretaps.taps):
        observed = tuple(dict.fromkeys(net.message_of(eid) for eid in tap.edges))
        names = tuple(tap.sources) + observed
        if not tap.sources or not observed or any(x not in labels for x in names):
            continue
        a = ground.mask_of(tap.sources)
        b = ground.mask_of(observed)
        coeffs = {}
        _add(coeffs, cl(a), one)
        _add(coeffs, cl(b), one)
        _add(coeffs, cl(a | b), -one)
        push(coeffs, "eq", Fraction(0), ("secrecy", str(r)))
    # Mutual independence of sessions and randomness (one equality; the
    # polymatroid axioms propagate it to every sub-grouping).
    indep = [
        lab
        for lab in ground.labels
        if vg.kinds[lab] in ("session", "randomness")
    ]
    if len(indep) >= 2:
        coeffs = {}
        for lab in indep:
            _add(coeffs, cl(ground.mask_of([lab])), one)
        _add(coeffs, cl(ground.mask_of(indep)), -one)
        push(coeffs, "eq", Fraction(0), ("independence",))
    # Caller axioms.
    for name, expr, relation, value in axioms:
        raw, const, _ = _parse_expression(ground, expr)
        coeffs = {}
        for mask, c in raw.items():
            _add(coeffs, cl(mask), c)
        rhs = as_fraction(value) - const
        sense = {"=": "eq", ">=": "ge", "<=": "le"}[relation]
        push(coeffs, sense, rhs, ("axiom", name))
    coords = sorted({cl(m) for m in range(1, 1 << n)} | ({cl(0)} if cl(0) else set()))
    return ShannonLP(
        variables=vg,
        closures=closures,
        coords=tuple(coords),
        constraints=tuple(rows),
        reduced=reduce,
    )


# ----------------------------------------------------------------------
# solving


@dataclass(frozen=True)
class Certificate:
    status: str  # "optimal" | "infeasible" | "unbounded" | "feasible"
    value: Optional[Fraction]
    orientation: str  # "max" | "min" | "feasibility"
    primal: Optional[dict[int, Fraction]]  # closed mask -> value
    duals: Optional[tuple[Fraction, ...]]  # per constraint, solver orientation
    farkas: Optional[tuple[Fraction, ...]]
    ray: Optional[dict[int, Fraction]]
    pivots: tuple[tuple[int, int], ...]


class ShannonSolver:
    """Exact solver bound to one LP; re-use it for chains of objectives.

    Elemental rows are activated lazily: each solve runs on the active
    subset, the answer is checked exactly against every remaining row,
    violated rows join in bulk, and the loop repeats.  A returned optimum
    is therefore an optimum of the full LP (inactive rows carry zero dual
    multipliers), and the final certificate is re-verified against the
    complete row list.
    """

    def __init__(self, lp: ShannonLP, verify: bool = True):
        self.lp = lp
        self.verify = verify
        self.index = lp.coord_index()
        self.all_rows = [
            LinearRow({self.index[m]: c for m, c in con.coeffs}, con.sense, con.rhs)
            for con in lp.constraints
        ]
        self.active: list[int] = [
            i for i, con in enumerate(lp.constraints) if con.tag[0] != "elemental"
        ]
        self._inactive: list[int] = [
            i for i, con in enumerate(lp.constraints) if con.tag[0] == "elemental"
        ]
        self._float_model = None
        self._rebuild()

    # ------------------------------------------------------------------
    # float-guided row seeding
    #
    # A floating-point solve over the full row set predicts which rows an
    # optimal basis touches (nonzero dual multipliers); those rows are
    # activated before the exact solve.  The prediction has no bearing on
    # correctness: the exact lazy loop below re-checks every answer
    # against every row and activates anything the heuristic missed.

    def _ensure_float_model(self) -> None:
        if self._float_model is not None:
            return
        import numpy as np
        from scipy import sparse

        n = len(self.lp.coords)
        ub_data, ub_b, ub_idx = ([], [], []), [], []
        eq_data, eq_b, eq_idx = ([], [], []), [], []
        for i, row in enumerate(self.all_rows):
            sign = -1.0 if row.sense == "ge" else 1.0
            if row.sense == "eq":
                block, rhs_list, idx = eq_data, eq_b, eq_idx
            else:
                block, rhs_list, idx = ub_data, ub_b, ub_idx
            r = len(idx)
            for j, c in row.coeffs.items():
                block[0].append(sign * float(c))
                block[1].append(r)
                block[2].append(j)
            rhs_list.append(sign * float(row.rhs))
            idx.append(i)

        def matrix(block, rows):
            if not rows:
                return None
            return sparse.csr_matrix(
                (block[0], (block[1], block[2])), shape=(len(rows), n)
            )

        self._float_model = (
            matrix(ub_data, ub_idx),
            np.array(ub_b) if ub_idx else None,
            ub_idx,
            matrix(eq_data, eq_idx),
            np.array(eq_b) if eq_idx else None,
            eq_idx,
        )

    def _float_seed(self, res) -> list[int]:
        _, _, ub_idx, _, _, _ = self._float_model
        seed: list[int] = []
        if res is not None and res.status == 0 and ub_idx:
            # Rows in the optimal dual support plus rows tight at the
            # optimal vertex: together they describe the optimal face.
            for pos, y in enumerate(res.ineqlin.marginals):
                if abs(y) > 1e-9:
                    seed.append(ub_idx[pos])
            for pos, s in enumerate(res.ineqlin.residual):
                if abs(s) < 1e-7:
                    seed.append(ub_idx[pos])
        inactive = set(self._inactive)
        return sorted({i for i in seed if i in inactive})

    _RATIONALIZE_LIMIT = 1 << 24

    def _float_certificate(
        self, objective: Mapping[int, Fraction], res
    ) -> Optional[SimplexCertificate]:
        """Try to certify the optimum from a rationalized float solution.

        The float solver only proposes a primal point and dual
        multipliers; both are rounded to small rationals and the pair is
        accepted solely when it passes exact substitution verification
        against every row.  On any mismatch the caller falls back to the
        exact simplex, so no floating-point value is ever trusted.
        """
        if res is None or res.status != 0:
            return None
        _, _, ub_idx, _, _, eq_idx = self._float_model
        lim = self._RATIONALIZE_LIMIT
        x: dict[int, Fraction] = {}
        for j, v in enumerate(res.x):
            if abs(v) > 1e-11:
                x[j] = Fraction(float(v)).limit_denominator(lim)
        duals = [Fraction(0)] * len(self.all_rows)
        if ub_idx:
            for pos, y in enumerate(res.ineqlin.marginals):
                if abs(y) > 1e-11:
                    yy = -Fraction(float(y)).limit_denominator(lim)
                    row = self.all_rows[ub_idx[pos]]
                    duals[ub_idx[pos]] = yy if row.sense == "le" else -yy
        if eq_idx:
            for pos, y in enumerate(res.eqlin.marginals):
                if abs(y) > 1e-11:
                    duals[eq_idx[pos]] = -Fraction(float(y)).limit_denominator(lim)
        value = sum((c * x.get(j, Fraction(0)) for j, c in objective.items()), Fraction(0))
        cert = SimplexCertificate(
            status="optimal",
            value=value,
            x=x,
            duals=tuple(duals),
            farkas=None,
            ray=None,
            pivots=(),
        )
        try:
            verify_certificate(len(self.lp.coords), self.all_rows, dict(objective), cert)
        except CertificateError:
            return None
        return cert

    def _float_solve(self, objective: Mapping[int, Fraction]):
        try:
            from scipy import optimize
        except ImportError:  # pragma: no cover - scipy is a declared dependency
            return None
        self._ensure_float_model()
        a_ub, b_ub, ub_idx, a_eq, b_eq, eq_idx = self._float_model
        n = len(self.lp.coords)
        c = [0.0] * n
        for j, v in objective.items():
            c[j] = -float(v)
        return optimize.linprog(
            c,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=[(0, None)] * n,
            method="highs",
        )

    def _float_farkas(self) -> Optional[SimplexCertificate]:
        """Candidate infeasibility certificate from an elastic relaxation.

        Minimize the total constraint violation (one elastic variable per
        inequality copy); when the optimum is positive, its dual
        multipliers are a Farkas combination.  The rationalized
        multipliers are accepted only after exact verification.
        """
        try:
            from scipy import optimize, sparse
        except ImportError:  # pragma: no cover
            return None
        # Elastic rows in <=-form: (sign * a) . x - t_k <= sign * b.
        data, ri, ci, rhs, owners, signs = [], [], [], [], [], []

        def add(row_idx: int, row: LinearRow, sign: int) -> None:
            k = len(rhs)
            for j, c in row.coeffs.items():
                data.append(sign * float(c))
                ri.append(k)
                ci.append(j)
            rhs.append(sign * float(row.rhs))
            owners.append(row_idx)
            signs.append(sign)

        for i, row in enumerate(self.all_rows):
            if row.sense == "le":
                add(i, row, 1)
            elif row.sense == "ge":
                add(i, row, -1)
            else:
                add(i, row, 1)
                add(i, row, -1)
        n = len(self.lp.coords)
        m = len(rhs)
        for k in range(m):
            data.append(-1.0)
            ri.append(k)
            ci.append(n + k)
        a = sparse.csr_matrix((data, (ri, ci)), shape=(m, n + m))
        c = [0.0] * n + [1.0] * m
        res = optimize.linprog(
            c, A_ub=a, b_ub=rhs, bounds=[(0, None)] * (n + m), method="highs"
        )
        if res.status != 0 or res.fun <= 1e-9:
            return None
        lim = self._RATIONALIZE_LIMIT
        farkas = [Fraction(0)] * len(self.all_rows)
        for k, marg in enumerate(res.ineqlin.marginals):
            if abs(marg) > 1e-11:
                y = -Fraction(float(marg)).limit_denominator(lim)
                farkas[owners[k]] += signs[k] * y
        cert = SimplexCertificate(
            status="infeasible",
            value=None,
            x={},
            duals=None,
            farkas=tuple(farkas),
            ray=None,
            pivots=(),
        )
        try:
            verify_certificate(len(self.lp.coords), self.all_rows, {}, cert)
        except CertificateError:
            return None
        return cert

    def _rebuild(self) -> None:
        self.simplex = ExactSimplex(
            len(self.lp.coords),
            [self.all_rows[i] for i in self.active],
            verify=False,
        )

    def _violated_by_point(self, x: Mapping[int, Fraction]) -> list[int]:
        out = []
        for i in self._inactive:
            row = self.all_rows[i]
            v = sum((c * x.get(j, Fraction(0)) for j, c in row.coeffs.items()), Fraction(0))
            bad = (
                v > row.rhs
                if row.sense == "le"
                else v < row.rhs
                if row.sense == "ge"
                else v != row.rhs
            )
            if bad:
                out.append(i)
        return out

    def _violated_by_ray(self, ray: Mapping[int, Fraction]) -> list[int]:
        out = []
        for i in self._inactive:
            row = self.all_rows[i]
            v = sum((c * ray.get(j, Fraction(0)) for j, c in row.coeffs.items()), Fraction(0))
            bad = v > 0 if row.sense == "le" else v < 0 if row.sense == "ge" else v != 0
            if bad:
                out.append(i)
        return out

    def _activate(self, rows: list[int]) -> None:
        self.active.extend(rows)
        taken = set(rows)
        self._inactive = [i for i in self._inactive if i not in taken]
        self._rebuild()

    def _pad(self, cert: SimplexCertificate) -> SimplexCertificate:
        def spread(values):
            if values is None:
                return None
            full = [Fraction(0)] * len(self.all_rows)
            for pos, i in enumerate(self.active):
                full[i] = values[pos]
            return tuple(full)

        return SimplexCertificate(
            status=cert.status,
            value=cert.value,
            x=cert.x,
            duals=spread(cert.duals),
            farkas=spread(cert.farkas),
            ray=cert.ray,
            pivots=cert.pivots,
        )

    def _solve_max(self, objective: Mapping[int, Fraction]) -> SimplexCertificate:
        res = self._float_solve(objective)
        if res is not None:
            if res.status == 0:
                fast = self._float_certificate(objective, res)
                if fast is not None:
                    return fast
            elif res.status == 2:
                fast = self._float_farkas()
                if fast is not None:
                    return fast
        seed = self._float_seed(res)
        if seed:
            self._activate(seed)
        while True:
            cert = self.simplex.maximize(objective)
            if cert.status == "optimal":
                grow = self._violated_by_point(cert.x)
            elif cert.status == "unbounded":
                grow = self._violated_by_ray(cert.ray)
                if not grow:
                    # The base point must clear the inactive rows too.
                    grow = self._violated_by_point(cert.x)
            else:
                grow = []
            if grow:
                self._activate(grow)
                continue
            out = self._pad(cert)
            if self.verify:
                verify_certificate(len(self.lp.coords), self.all_rows, dict(objective), out)
            return out

    def _to_cols(self, coeffs: Mapping[int, Fraction]) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for m, c in coeffs.items():
            if m not in self.index:
                raise KeyError(
                    f"coordinate {self.lp.ground.format_subset(m)} is not a closed subset"
                )
            out[self.index[m]] = out.get(self.index[m], Fraction(0)) + c
        return out

    def _from_cols(self, x: Optional[Mapping[int, Fraction]]) -> Optional[dict[int, Fraction]]:
        if x is None:
            return None
        return {self.lp.coords[j]: v for j, v in x.items()}

    def _wrap(
        self, cert: SimplexCertificate, orientation: str, constant: Fraction, negate: bool
    ) -> Certificate:
        value = None
        if cert.status == "optimal":
            value = (-cert.value if negate else cert.value) + constant
        status = cert.status
        return Certificate(
            status=status,
            value=value,
            orientation=orientation,
            primal=self._from_cols(cert.x) if cert.status != "infeasible" else None,
            duals=cert.duals,
            farkas=cert.farkas,
            ray=self._from_cols(cert.ray),
            pivots=cert.pivots,
        )

    def maximize(
        self, objective: Union[str, Mapping[int, Fraction]], constant: Fraction = Fraction(0)
    ) -> Certificate:
        coeffs, const = self._compiled(objective, constant)
        cert = self._solve_max(self._to_cols(coeffs))
        return self._wrap(cert, "max", const, negate=False)

    def minimize(
        self, objective: Union[str, Mapping[int, Fraction]], constant: Fraction = Fraction(0)
    ) -> Certificate:
        coeffs, const = self._compiled(objective, constant)
        cert = self._solve_max({m: -c for m, c in self._to_cols(coeffs).items()})
        return self._wrap(cert, "min", const, negate=True)

    def feasibility(self) -> Certificate:
        cert = self._solve_max({})
        if cert.status == "infeasible":
            return self._wrap(cert, "feasibility", Fraction(0), negate=False)
        out = self._wrap(cert, "feasibility", Fraction(0), negate=False)
        return Certificate(
            "feasible", None, "feasibility", out.primal, out.duals, None, None, out.pivots
        )

    def _compiled(
        self, objective: Union[str, Mapping[int, Fraction]], constant: Fraction
    ) -> tuple[dict[int, Fraction], Fraction]:
        if isinstance(objective, str):
            coeffs, const = self.lp.compile(objective)
            return coeffs, const + constant
        out: dict[int, Fraction] = {}
        for m, c in objective.items():
            cl = self.lp.closures[m]
            if cl:
                out[cl] = out.get(cl, Fraction(0)) + as_fraction(c)
        return out, constant


def _solver_for(lp_or_solver, solver: Optional[ShannonSolver]) -> ShannonSolver:
    if solver is not None:
        return solver
    if isinstance(lp_or_solver, ShannonSolver):
        return lp_or_solver
    return ShannonSolver(lp_or_solver)


def maximize(lp: Union[ShannonLP, ShannonSolver], objective, solver: Optional[ShannonSolver] = None) -> Certificate:
    return _solver_for(lp, solver).maximize(objective)


def minimize(lp: Union[ShannonLP, ShannonSolver], objective, solver: Optional[ShannonSolver] = None) -> Certificate:
    return _solver_for(lp, solver).minimize(objective)


def feasibility(lp: Union[ShannonLP, ShannonSolver], solver: Optional[ShannonSolver] = None) -> Certificate:
    return _solver_for(lp, solver).feasibility()


@dataclass(frozen=True)
class ForcedResult:
    forced: bool
    optimum: Optional[Fraction]
    certificate: Certificate

    def __bool__(self) -> bool:
        return self.forced


def prove_forced_equality(
    lp: Union[ShannonLP, ShannonSolver],
    expression: str,
    solver: Optional[ShannonSolver] = None,
) -> ForcedResult:
    """Certify that a Shannon-nonnegative quantity is exactly zero on the LP.

    The expression must be a positive combination of conditional entropies
    and (conditional) mutual informations, so its minimum is zero by the
    elemental inequalities; it is forced iff its exact maximum is zero.
    """
    sol = _solver_for(lp, solver)
    if not expression_is_elemental_nonnegative(sol.lp.ground, expression):
        raise ValueError(
            f"{expression!r} is not recognized as elemental-nonnegative"
        )
    cert = sol.maximize(expression)
    if cert.status == "infeasible":
        return ForcedResult(False, None, cert)
    if cert.status == "unbounded":
        return ForcedResult(False, None, cert)
    return ForcedResult(cert.value == 0, cert.value, cert)


@dataclass(frozen=True)
class Claim:
    name: str
    expression: str
    relation: str  # "=" | ">=" | "<="
    value: Fraction

    @classmethod
    def of(cls, name: str, expression: str, relation: str, value) -> "Claim":
        if relation not in ("=", ">=", "<="):
            raise ValueError(f"unknown relation {relation!r}")
        return cls(name, expression, relation, as_fraction(value))


@dataclass(frozen=True)
class ChainVerdict:
    claim: Claim
    status: str  # "forced" | "consistent" | "contradicted" | "vacuous"
    lower: Optional[Fraction]  # exact min of the expression, None if unbounded/skipped
    upper: Optional[Fraction]  # exact max, None if unbounded/skipped

    def describe(self) -> str:
        if self.status == "vacuous":
            rng = "(LP infeasible)"
        else:
            rng = f"[{self.lower}, {self.upper if self.upper is not None else 'unbounded'}]"
        return f"{self.claim.name}: {self.claim.expression} {self.claim.relation} {self.claim.value} -> {self.status} {rng}"


@dataclass(frozen=True)
class ChainReport:
    verdicts: tuple[ChainVerdict, ...]

    @property
    def all_forced(self) -> bool:
        return all(v.status == "forced" for v in self.verdicts)

    def describe(self) -> str:
        return "\n".join(v.describe() for v in self.verdicts)


def verify_proof_chain(
    lp: Union[ShannonLP, ShannonSolver],
    claims: Iterable[Union[Claim, tuple]],
    solver: Optional[ShannonSolver] = None,
) -> ChainReport:
    """Per-claim verdicts via exact maximize/minimize.

    "forced" means every feasible entropy point satisfies the claim with
    equality of the stated kind; "consistent" means some do and some do
    not; "contradicted" means none do.
    """
    sol = _solver_for(lp, solver)
    verdicts: list[ChainVerdict] = []
    feas = sol.feasibility()
    for claim in claims:
        if not isinstance(claim, Claim):
            claim = Claim.of(*claim)
        if feas.status == "infeasible":
            verdicts.append(ChainVerdict(claim, "vacuous", None, None))
            continue
        hi_cert = sol.maximize(claim.expression)
        lo_cert = sol.minimize(claim.expression)
        hi = hi_cert.value if hi_cert.status == "optimal" else None
        lo = lo_cert.value if lo_cert.status == "optimal" else None
        v = claim.value
        if claim.relation == "=":
            if hi is not None and lo is not None and hi == lo == v:
                status = "forced"
            elif (hi is not None and v > hi) or (lo is not None and v < lo):
                status = "contradicted"
            else:
                status = "consistent"
        elif claim.relation == ">=":
            if lo is not None and lo >= v:
                status = "forced"
            elif hi is not None and hi < v:
                status = "contradicted"
            else:
                status = "consistent"
        else:  # "<="
            if hi is not None and hi <= v:
                status = "forced"
            elif lo is not None and lo > v:
                status = "contradicted"
            else:
                status = "consistent"
        verdicts.append(ChainVerdict(claim, status, lo, hi))
    return ChainReport(tuple(verdicts))


# ----------------------------------------------------------------------
# export and evaluation


def export_text(lp: ShannonLP) -> str:
    ground = lp.ground
    lines = [
        "# Shannon LP over " + ", ".join(ground.labels),
        f"# coordinates: {len(lp.coords)} closed subsets"
        + ("" if lp.reduced else " (unreduced)"),
    ]
    op = {"ge": ">=", "le": "<=", "eq": "="}
    for con in lp.constraints:
        parts = []
        for mask, c in con.coeffs:
            term = f"h{ground.format_subset(mask)}"
            if c == 1:
                parts.append(f"+ {term}")
            elif c == -1:
                parts.append(f"- {term}")
            elif c > 0:
                parts.append(f"+ {c}*{term}")
            else:
                parts.append(f"- {-c}*{term}")
        body = " ".join(parts).lstrip("+ ").strip()
        lines.append(f"{body} {op[con.sense]} {con.rhs}  # {':'.join(con.tag)}")
    return "\n".join(lines) + "\n"


def satisfies(
    lp: ShannonLP, dist: JointDistribution, tol: float = 1e-9
) -> tuple[bool, list[str]]:
    """Evaluate every constraint at a distribution's entropy point.

    Variable labels must name variables of the distribution (sessions,
    edge messages, and V_<node> randomness, as produced by
    `induced_joint_distribution`).
    """
    ground = lp.ground
    cache: dict[int, float] = {0: 0.0}

    def h(mask: int) -> float:
        if mask not in cache:
            cache[mask] = subset_entropy(dist, ground.labels_of(mask))
        return cache[mask]

    failures = []
    for con in lp.constraints:
        value = sum(float(c) * h(m) for m, c in con.coeffs)
        rhs = float(con.rhs)
        ok = (
            value >= rhs - tol
            if con.sense == "ge"
            else value <= rhs + tol
            if con.sense == "le"
            else abs(value - rhs) <= tol
        )
        if not ok:
            failures.append(":".join(con.tag))
    return not failures, failures


def certificate_to_json(lp: ShannonLP, cert: Certificate) -> str:
    ground = lp.ground
    doc: dict = {
        "status": cert.status,
        "orientation": cert.orientation,
        "value": str(cert.value) if cert.value is not None else None,
    }
    if cert.primal is not None:
        doc["primal"] = {
            ground.format_subset(m): str(v) for m, v in sorted(cert.primal.items())
        }
    if cert.duals is not None:
        doc["duals"] = {
            ":".join(lp.constraints[i].tag): str(y)
            for i, y in enumerate(cert.duals)
            if y
        }
    if cert.farkas is not None:
        doc["farkas"] = {
            ":".join(lp.constraints[i].tag): str(y)
            for i, y in enumerate(cert.farkas)
            if y
        }
    if cert.ray is not None:
        doc["ray"] = {ground.format_subset(m): str(v) for m, v in sorted(cert.ray.items())}
    doc["pivots"] = len(cert.pivots)
    return json.dumps(doc, indent=2)
