"""Network codes: exact evaluation, admissibility, and bounded search.

A code fixes a finite alphabet per source and per distinct edge message,
an optional rational randomness pmf per node, and one local encoder table
per non-forwarding edge.  Encoder inputs are exactly the variables
incident to the edge's tail (sessions originating there, incoming edges,
the tail's randomness if any), in a canonical order: sessions by id,
incoming edges by ancestral position, randomness last.

All admissibility decisions are exact.  Zero-error decoding and perfect
secrecy are decided on the induced rational joint distribution; the
alphabet-versus-capacity and rate checks compare integer powers, never
logarithms.
"""

from __future__ import annotations

import itertools
import json
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from entroflow.entropy import JointDistribution, as_fraction, check_independence
from entroflow.network import Capacity, NetworkProblem, ancestral_order, validate

__all__ = [
    "DEFAULT_OUTCOME_BUDGET",
    "DEFAULT_SEARCH_BUDGET",
    "BudgetExceededError",
    "NodeRandomness",
    "LocalEncoder",
    "NetworkCode",
    "Verdict",
    "CodeBuilder",
    "DerandomizeResult",
    "SearchOutcome",
    "alphabet_fits_capacity",
    "alphabet_meets_rate",
    "minimal_source_alphabet",
    "canonical_inputs",
    "evaluate",
    "induced_joint_distribution",
    "check_zero_error",
    "check_secrecy",
    "check_admissible",
    "derandomize",
    "exhaustive_search",
    "code_to_json",
    "code_from_json",
]

DEFAULT_OUTCOME_BUDGET = 10 ** 7
DEFAULT_SEARCH_BUDGET = 10 ** 7


class BudgetExceededError(RuntimeError):
    pass


def alphabet_fits_capacity(size: int, capacity: Capacity) -> bool:
    """Exact check of size <= 2**capacity for a rational capacity p/q."""
    if size < 1:
        raise ValueError("alphabet sizes are at least 1")
    if capacity.is_unbounded:
        return True
    p, q = capacity.value.numerator, capacity.value.denominator
    return size ** q <= 2 ** p


def alphabet_meets_rate(size: int, rate: Fraction) -> bool:
    """Exact check of size >= 2**rate for a rational rate p/q."""
    if size < 1:
        raise ValueError("alphabet sizes are at least 1")
    p, q = rate.numerator, rate.denominator
    if p < 0:
        return True
    return size ** q >= 2 ** p


def minimal_source_alphabet(rate: Fraction) -> int:
    size = 1
    while not alphabet_meets_rate(size, rate):
        size += 1
    return size


@dataclass(frozen=True)
class NodeRandomness:
    node: str
    pmf: tuple[Fraction, ...]  # over symbols 0..len-1

    def __post_init__(self) -> None:
        if not self.pmf:
            raise ValueError("randomness needs a nonempty alphabet")
        if any(p < 0 for p in self.pmf):
            raise ValueError("randomness probabilities must be nonnegative")
        if sum(self.pmf, Fraction(0)) != 1:
            raise ValueError("randomness pmf must sum to 1")

    @property
    def size(self) -> int:
        return len(self.pmf)

    @classmethod
    def uniform(cls, node: str, size: int) -> "NodeRandomness":
        return cls(node, tuple([Fraction(1, size)] * size))

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.pmf) if p > 0)


InputRef = tuple[str, str]  # ("session", id) | ("edge", id) | ("randomness", node)


@dataclass(frozen=True)
class LocalEncoder:
    """A total function from the tail's incident variables to an edge symbol.

    The table is flat in row-major order over the inputs (last input
    varies fastest).
    """

    edge: str
    inputs: tuple[InputRef, ...]
    input_sizes: tuple[int, ...]
    table: tuple[int, ...]
    output_size: int

    def __post_init__(self) -> None:
        expected = math.prod(self.input_sizes) if self.input_sizes else 1
        if len(self.table) != expected:
            raise ValueError(
                f"encoder table of {self.edge} has {len(self.table)} entries, expected {expected}"
            )
        if any(not 0 <= v < self.output_size for v in self.table):
            raise ValueError(f"encoder table of {self.edge} leaves the output alphabet")

    def apply(self, values: Sequence[int]) -> int:
        idx = 0
        for v, size in zip(values, self.input_sizes):
            idx = idx * size + v
        return self.table[idx]


def canonical_inputs(problem: NetworkProblem, edge_id: str, has_randomness: Callable[[str], bool]) -> tuple[InputRef, ...]:
    """The causal input list of an edge: tail sessions, in-edges, randomness."""
    net = problem.network
    edge = net.edge(edge_id)
    refs: list[InputRef] = []
    for s in sorted(problem.requirement.sessions, key=lambda s: s.id):
        if s.origin == edge.tail:
            refs.append(("session", s.id))
    order = {eid: i for i, eid in enumerate(ancestral_order(problem))}
    for inc in sorted(net.in_edges(edge.tail), key=lambda e: order[e.id]):
        refs.append(("edge", inc.id))
    if has_randomness(edge.tail):
        refs.append(("randomness", edge.tail))
    return tuple(refs)


@dataclass(frozen=True)
class NetworkCode:
    problem: NetworkProblem
    source_alphabets: Mapping[str, int]
    edge_alphabets: Mapping[str, int]  # distinct messages: non-forwarding edges only
    randomness: Mapping[str, NodeRandomness]
    encoders: Mapping[str, LocalEncoder]

    def __post_init__(self) -> None:
        errors = validate(self.problem)
        if errors:
            raise ValueError("invalid problem: " + "; ".join(errors))
        net = self.problem.network
        sessions = {s.id for s in self.problem.requirement.sessions}
        if set(self.source_alphabets) != sessions:
            raise ValueError("source alphabets must cover exactly the sessions")
        messages = {e.id for e in net.edges if e.forwards is None}
        if set(self.edge_alphabets) != messages:
            raise ValueError("edge alphabets must cover exactly the non-forwarding edges")
        for node, rnd in self.randomness.items():
            if node not in net.nodes:
                raise ValueError(f"randomness at unknown node {node!r}")
            if rnd.node != node:
                raise ValueError("randomness entry bound to the wrong node")
        if set(self.encoders) != messages:
            raise ValueError("encoders must cover exactly the non-forwarding edges")
        has_rnd = lambda node: node in self.randomness
        for eid, enc in self.encoders.items():
            expected = canonical_inputs(self.problem, eid, has_rnd)
            if enc.inputs != expected:
                raise ValueError(
                    f"encoder of {eid} must take exactly its incident variables {expected}"
                )
            sizes = tuple(self._input_size(ref) for ref in enc.inputs)
            if enc.input_sizes != sizes:
                raise ValueError(f"encoder of {eid} disagrees with the input alphabets")
            if enc.output_size != self.edge_alphabets[eid]:
                raise ValueError(f"encoder of {eid} disagrees with the edge alphabet")

    def _input_size(self, ref: InputRef) -> int:
        kind, name = ref
        if kind == "session":
            return self.source_alphabets[name]
        if kind == "edge":
            return self.edge_alphabets[self.problem.network.message_of(name)]
        return self.randomness[name].size

    def session_order(self) -> tuple[str, ...]:
        return tuple(sorted(s.id for s in self.problem.requirement.sessions))

    def randomness_order(self) -> tuple[str, ...]:
        return tuple(sorted(self.randomness))


@dataclass(frozen=True)
class Verdict:
    admissible: bool
    reasons: tuple[tuple[str, ...], ...]

    def __bool__(self) -> bool:
        return self.admissible

    def describe(self) -> str:
        if self.admissible:
            return "admissible"
        return "; ".join(":".join(r) for r in self.reasons)


class CodeBuilder:
    """Tabulates encoder functions into a validated NetworkCode.

    Encoder callables receive a mapping from input names to symbols:
    session ids for co-located sources, edge ids for incoming edges, and
    "V" for the tail's randomness.
    """

    def __init__(self, problem: NetworkProblem) -> None:
        self.problem = problem
        self._sources: dict[str, int] = {}
        self._edges: dict[str, int] = {}
        self._randomness: dict[str, NodeRandomness] = {}
        self._functions: dict[str, Callable[[Mapping[str, int]], int]] = {}

    def source(self, session_id: str, size: int) -> "CodeBuilder":
        self._sources[session_id] = int(size)
        return self

    def randomness(self, node: str, pmf: Union[int, Sequence[Union[Fraction, int, str]]]) -> "CodeBuilder":
        if isinstance(pmf, int):
            self._randomness[node] = NodeRandomness.uniform(node, pmf)
        else:
            self._randomness[node] = NodeRandomness(node, tuple(as_fraction(p) for p in pmf))
        return self

    def edge(self, edge_id: str, size: int, fn: Callable[[Mapping[str, int]], int]) -> "CodeBuilder":
        self._edges[edge_id] = int(size)
        self._functions[edge_id] = fn
        return self

    def constant_edge(self, edge_id: str) -> "CodeBuilder":
        return self.edge(edge_id, 1, lambda _: 0)

    def build(self) -> NetworkCode:
        problem = self.problem
        has_rnd = lambda node: node in self._randomness
        encoders: dict[str, LocalEncoder] = {}
        for eid, fn in self._functions.items():
            refs = canonical_inputs(problem, eid, has_rnd)
            sizes = []
            names = []
            for kind, name in refs:
                if kind == "session":
                    sizes.append(self._sources[name])
                    names.append(name)
                elif kind == "edge":
                    sizes.append(self._edges[problem.network.message_of(name)])
                    names.append(name)
                else:
                    sizes.append(self._randomness[name].size)
                    names.append("V")
            table = []
            for combo in itertools.product(*(range(s) for s in sizes)):
                table.append(int(fn(dict(zip(names, combo)))))
            encoders[eid] = LocalEncoder(
                edge=eid,
                inputs=refs,
                input_sizes=tuple(sizes),
                table=tuple(table),
                output_size=self._edges[eid],
            )
        return NetworkCode(
            problem=problem,
            source_alphabets=dict(self._sources),
            edge_alphabets=dict(self._edges),
            randomness=dict(self._randomness),
            encoders=encoders,
        )


def _normalize_assignment(
    order: Sequence[str], values: Union[Mapping[str, int], Sequence[int]]
) -> dict[str, int]:
    if isinstance(values, Mapping):
        return {k: values[k] for k in order}
    values = tuple(values)
    if len(values) != len(order):
        raise ValueError(f"expected {len(order)} values for {order}")
    return dict(zip(order, values))


def evaluate(
    code: NetworkCode,
    source_tuple: Union[Mapping[str, int], Sequence[int]],
    randomness_tuple: Union[Mapping[str, int], Sequence[int]] = (),
) -> dict[str, int]:
    """Forward pass in ancestral order; returns a symbol for every edge."""
    problem = code.problem
    sources = _normalize_assignment(code.session_order(), source_tuple)
    rnd = _normalize_assignment(code.randomness_order(), randomness_tuple)
    for sid, v in sources.items():
        if not 0 <= v < code.source_alphabets[sid]:
            raise ValueError(f"source symbol {v} outside the alphabet of {sid}")
    for node, v in rnd.items():
        if not 0 <= v < code.randomness[node].size:
            raise ValueError(f"randomness symbol {v} outside the alphabet at {node}")
    net = problem.network
    values: dict[str, int] = {}
    for name in ancestral_order(problem):
        if name in sources:
            continue
        edge = net.edge(name)
        if edge.forwards is not None:
            values[name] = values[edge.forwards]
            continue
        enc = code.encoders[name]
        args = []
        for kind, ref in enc.inputs:
            if kind == "session":
                args.append(sources[ref])
            elif kind == "edge":
                args.append(values[ref])
            else:
                args.append(rnd[ref])
        values[name] = enc.apply(args)
    return values


def _message_order(problem: NetworkProblem) -> tuple[str, ...]:
    net = problem.network
    return tuple(
        name
        for name in ancestral_order(problem)
        if any(e.id == name and e.forwards is None for e in net.edges)
    )


def induced_joint_distribution(
    code: NetworkCode, budget: int = DEFAULT_OUTCOME_BUDGET
) -> JointDistribution:
    """Exact joint pmf of sessions, node randomness, and distinct messages.

    Sources are independent and uniform on their alphabets; randomness is
    independent across nodes with its declared pmf.  Variables are named
    by session id, "V_<node>", and edge id.
    """
    problem = code.problem
    sessions = code.session_order()
    rnodes = code.randomness_order()
    messages = _message_order(problem)
    total = math.prod(code.source_alphabets[s] for s in sessions) if sessions else 1
    supports = {node: code.randomness[node].support() for node in rnodes}
    for node in rnodes:
        total *= len(supports[node])
    if total > budget:
        raise BudgetExceededError(
            f"{total} outcome points exceed the budget of {budget}"
        )
    variables: list[tuple[str, int]] = []
    variables += [(s, code.source_alphabets[s]) for s in sessions]
    variables += [(f"V_{node}", code.randomness[node].size) for node in rnodes]
    variables += [(m, code.edge_alphabets[m]) for m in messages]
    base = Fraction(1)
    for s in sessions:
        base /= code.source_alphabets[s]
    pmf: dict[tuple[int, ...], Fraction] = {}
    for src_combo in itertools.product(*(range(code.source_alphabets[s]) for s in sessions)):
        srcs = dict(zip(sessions, src_combo))
        for rnd_combo in itertools.product(*(supports[node] for node in rnodes)):
            rnd = dict(zip(rnodes, rnd_combo))
            p = base
            for node, v in rnd.items():
                p *= code.randomness[node].pmf[v]
            values = evaluate(code, srcs, rnd)
            outcome = src_combo + rnd_combo + tuple(values[m] for m in messages)
            pmf[outcome] = pmf.get(outcome, Fraction(0)) + p
    return JointDistribution.of(tuple(variables), pmf)


def _sink_input_names(problem: NetworkProblem, sink: str) -> tuple[str, ...]:
    net = problem.network
    incoming = tuple(net.message_of(e.id) for e in net.in_edges(sink))
    local = tuple(s.id for s in problem.requirement.sessions if s.origin == sink)
    seen: list[str] = []
    for name in incoming + local:
        if name not in seen:
            seen.append(name)
    return tuple(seen)


def check_zero_error(
    code: NetworkCode,
    problem: Optional[NetworkProblem] = None,
    dist: Optional[JointDistribution] = None,
) -> tuple[bool, list[tuple[str, str]]]:
    """Exact decodability at every sink for every demanded session."""
    problem = problem or code.problem
    dist = dist or induced_joint_distribution(code)
    names = dist.names()
    failures: list[tuple[str, str]] = []
    for sink, demanded in problem.demands().items():
        givens = _sink_input_names(problem, sink)
        for sid in demanded:
            if sid in givens:
                continue
            g_idx = tuple(names.index(g) for g in givens)
            t_idx = names.index(sid)
            seen: dict[tuple[int, ...], int] = {}
            ok = True
            for outcome in dist.pmf:
                key = tuple(outcome[i] for i in g_idx)
                val = outcome[t_idx]
                if seen.setdefault(key, val) != val:
                    ok = False
                    break
            if not ok:
                failures.append((sink, sid))
    return not failures, failures


def check_secrecy(
    code: NetworkCode,
    problem: Optional[NetworkProblem] = None,
    dist: Optional[JointDistribution] = None,
) -> tuple[bool, list[int]]:
    """Exact zero-leakage check for every wiretap."""
    problem = problem or code.problem
    if not problem.wiretaps.taps:
        return True, []
    dist = dist or induced_joint_distribution(code)
    net = problem.network
    failures: list[int] = []
    for i, tap in enumerate(problem.wiretaps.taps):
        observed: list[str] = []
        for eid in tap.edges:
            msg = net.message_of(eid)
            if msg not in observed:
                observed.append(msg)
        targets = tuple(tap.sources)
        if not targets or not observed:
            continue
        if not check_independence(dist, targets, tuple(observed)):
            failures.append(i)
    return not failures, failures


def check_admissible(
    code: NetworkCode, problem: Optional[NetworkProblem] = None
) -> Verdict:
    """Alphabet-capacity, rate, zero-error, and secrecy checks, all exact."""
    problem = problem or code.problem
    net = problem.network
    reasons: list[tuple[str, ...]] = []
    for e in net.edges:
        size = code.edge_alphabets[net.message_of(e.id)]
        if not alphabet_fits_capacity(size, e.capacity):
            reasons.append(
                ("capacity", e.id, f"alphabet {size} exceeds 2^{e.capacity}")
            )
    for s in problem.requirement.sessions:
        size = code.source_alphabets[s.id]
        if not alphabet_meets_rate(size, s.rate):
            reasons.append(("rate", s.id, f"alphabet {size} below 2^{s.rate}"))
    if not reasons:
        dist = induced_joint_distribution(code)
        ok, failures = check_zero_error(code, problem, dist)
        for sink, sid in failures:
            reasons.append(("decode", sink, sid))
        ok, taps = check_secrecy(code, problem, dist)
        for i in taps:
            reasons.append(("leak", str(i)))
    return Verdict(not reasons, tuple(reasons))


@dataclass(frozen=True)
class DerandomizeResult:
    ok: bool
    encoder: Optional[LocalEncoder]
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def derandomize(code: NetworkCode, target_edge: str) -> DerandomizeResult:
    """Strip randomness from one encoder when the message does not need it.

    The exact premise: the pair (non-randomness inputs, message) is
    jointly independent of all node randomness.  When it holds, the
    returned randomness-free table reproduces the message on every
    support point; when it fails, the premise violation is the outcome.
    """
    problem = code.problem
    net = problem.network
    msg = net.message_of(target_edge)
    enc = code.encoders[msg]
    rnodes = code.randomness_order()
    nonrand: list[str] = []
    rand_pos: Optional[int] = None
    for pos, (kind, name) in enumerate(enc.inputs):
        if kind == "session":
            nonrand.append(name)
        elif kind == "edge":
            nonrand.append(net.message_of(name))
        else:
            rand_pos = pos
    dist = induced_joint_distribution(code)
    rand_vars = tuple(f"V_{n}" for n in rnodes)
    group_a = tuple(dict.fromkeys(nonrand + [msg]))
    if rand_vars:
        if not check_independence(dist, group_a, rand_vars):
            return DerandomizeResult(
                False,
                None,
                f"({', '.join(group_a)}) is not independent of the node randomness",
            )
    if rand_pos is None:
        return DerandomizeResult(True, enc, "encoder takes no randomness input")
    # Any supported randomness symbol of the tail realizes the a.s. value.
    tail = enc.inputs[rand_pos][1]
    v0 = code.randomness[tail].support()[0]
    new_inputs = tuple(ref for i, ref in enumerate(enc.inputs) if i != rand_pos)
    new_sizes = tuple(s for i, s in enumerate(enc.input_sizes) if i != rand_pos)
    table = []
    for combo in itertools.product(*(range(s) for s in new_sizes)):
        args = list(combo)
        args.insert(rand_pos, v0)
        table.append(enc.apply(args))
    new_enc = LocalEncoder(msg, new_inputs, new_sizes, tuple(table), enc.output_size)
    # Belt: the projected table must agree with the message on the support.
    names = dist.names()
    in_idx = []
    for kind, name in new_inputs:
        in_idx.append(names.index(name if kind != "edge" else net.message_of(name)))
    m_idx = names.index(msg)
    for outcome in dist.pmf:
        args = [outcome[i] for i in in_idx]
        if new_enc.apply(args) != outcome[m_idx]:
            return DerandomizeResult(
                False, None, "projected table fails to reproduce the message"
            )
    return DerandomizeResult(True, new_enc, "")


@dataclass(frozen=True)
class SearchOutcome:
    status: str  # "found" | "exhausted" | "budget-exceeded"
    code: Optional[NetworkCode]
    searched: int
    total: int

    def __bool__(self) -> bool:
        return self.status == "found"

    @property
    def fraction_searched(self) -> Fraction:
        return Fraction(self.searched, self.total) if self.total else Fraction(1)


class _SearchPlan:
    def __init__(
        self,
        problem: NetworkProblem,
        alphabet_bounds: Union[int, Mapping[str, int]],
        allow_randomness: bool,
    ) -> None:
        errors = validate(problem)
        if errors:
            raise ValueError("invalid problem: " + "; ".join(errors))
        self.problem = problem
        net = problem.network
        if isinstance(alphabet_bounds, int):
            bounds: dict[str, int] = {"edges": alphabet_bounds}
        else:
            bounds = dict(alphabet_bounds)
        edge_default = bounds.get("edges", 2)
        self.sessions = tuple(sorted(s.id for s in problem.requirement.sessions))
        self.messages = _message_order(problem)
        if allow_randomness:
            declared = problem.randomness_nodes
            if declared:
                self.rnodes = tuple(sorted(declared))
            else:
                self.rnodes = tuple(
                    sorted({e.tail for e in net.edges if e.forwards is None})
                )
        else:
            self.rnodes = ()
        # Per-variable candidate sizes, pruned by rate and by every capacity
        # on the message's forwarding chain.
        by_session = {s.id: s for s in problem.requirement.sessions}
        self.size_options: list[tuple[str, tuple[int, ...]]] = []
        for sid in self.sessions:
            minimal = minimal_source_alphabet(by_session[sid].rate)
            top = bounds.get(sid, minimal)
            opts = tuple(range(minimal, max(minimal, top) + 1))
            self.size_options.append((sid, opts))
        caps_by_message: dict[str, list[Capacity]] = {m: [] for m in self.messages}
        for e in net.edges:
            caps_by_message[net.message_of(e.id)].append(e.capacity)
        for m in self.messages:
            top = bounds.get(m, edge_default)
            opts = tuple(
                k
                for k in range(1, top + 1)
                if all(alphabet_fits_capacity(k, c) for c in caps_by_message[m])
            )
            self.size_options.append((m, opts))
        for node in self.rnodes:
            top = bounds.get(f"V_{node}", edge_default)
            self.size_options.append((f"V_{node}", tuple(range(1, top + 1))))
        # Static evaluation plan over messages in ancestral order.
        self._input_refs: dict[str, tuple[InputRef, ...]] = {}
        for m in self.messages:
            self._input_refs[m] = canonical_inputs(
                problem, m, lambda node: node in self.rnodes
            )
        self.sink_plan: list[tuple[str, str, tuple[str, ...]]] = []
        for sink, demanded in problem.demands().items():
            givens = _sink_input_names(problem, sink)
            for sid in demanded:
                if sid not in givens:
                    self.sink_plan.append((sink, sid, givens))
        self.tap_plan: list[tuple[tuple[str, ...], tuple[str, ...]]] = []
        for tap in problem.wiretaps.taps:
            observed = tuple(
                dict.fromkeys(net.message_of(eid) for eid in tap.edges)
            )
            if tap.sources and observed:
                self.tap_plan.append((tuple(tap.sources), observed))

    def size_assignments(self):
        names = [name for name, _ in self.size_options]
        for combo in itertools.product(*(opts for _, opts in self.size_options)):
            yield dict(zip(names, combo))

    def table_space_size(self, sizes: Mapping[str, int], message: str) -> int:
        dims = self._table_dims(sizes, message)
        return sizes[message] ** math.prod(dims) if dims else sizes[message]

    def _table_dims(self, sizes: Mapping[str, int], message: str) -> tuple[int, ...]:
        dims = []
        for kind, name in self._input_refs[message]:
            if kind == "session":
                dims.append(sizes[name])
            elif kind == "edge":
                dims.append(sizes[self.problem.network.message_of(name)])
            else:
                dims.append(sizes[f"V_{name}"])
        return tuple(dims)

    def candidates_for(self, sizes: Mapping[str, int]) -> int:
        total = 1
        for m in self.messages:
            total *= self.table_space_size(sizes, m)
        return total

    def total_candidates(self) -> int:
        return sum(self.candidates_for(s) for s in self.size_assignments())

    def admissible_tables(
        self, sizes: Mapping[str, int], tables: Sequence[tuple[int, ...]]
    ) -> bool:
        """Exact zero-error and secrecy on integer outcome counts.

        Search-mode randomness is uniform, so every (source, randomness)
        combination is one equally likely outcome and independence reduces
        to integer count factorization.
        """
        problem = self.problem
        net = problem.network
        sessions = self.sessions
        rvars = tuple(f"V_{n}" for n in self.rnodes)
        src_ranges = [range(sizes[s]) for s in sessions]
        rnd_ranges = [range(sizes[v]) for v in rvars]
        dims = {m: self._table_dims(sizes, m) for m in self.messages}
        decode: dict[tuple[str, str], dict] = {(d, s): {} for d, s, _ in self.sink_plan}
        tap_counts = [
            (dict(), dict(), dict()) for _ in self.tap_plan
        ]  # joint, left, right
        n_outcomes = 0
        for src in itertools.product(*src_ranges):
            values = dict(zip(sessions, src))
            for rnd in itertools.product(*rnd_ranges):
                n_outcomes += 1
                values.update(zip(rvars, rnd))
                for m, table in zip(self.messages, tables):
                    idx = 0
                    for (kind, name), dim in zip(self._input_refs[m], dims[m]):
                        if kind == "session":
                            v = values[name]
                        elif kind == "edge":
                            v = values[net.message_of(name)]
                        else:
                            v = values[f"V_{name}"]
                        idx = idx * dim + v
                    values[m] = table[idx]
                for (sink, sid, givens) in self.sink_plan:
                    key = tuple(values[g] for g in givens)
                    got = decode[(sink, sid)].setdefault(key, values[sid])
                    if got != values[sid]:
                        return False
                for plan, counts in zip(self.tap_plan, tap_counts):
                    a = tuple(values[x] for x in plan[0])
                    b = tuple(values[x] for x in plan[1])
                    joint, left, right = counts
                    joint[(a, b)] = joint.get((a, b), 0) + 1
                    left[a] = left.get(a, 0) + 1
                    right[b] = right.get(b, 0) + 1
        for joint, left, right in tap_counts:
            for a, ca in left.items():
                for b, cb in right.items():
                    if joint.get((a, b), 0) * n_outcomes != ca * cb:
                        return False
        return True

    def realize(self, sizes: Mapping[str, int], tables: Sequence[tuple[int, ...]]) -> NetworkCode:
        has_rnd = lambda node: node in self.rnodes
        encoders = {}
        for m, table in zip(self.messages, tables):
            refs = self._input_refs[m]
            encoders[m] = LocalEncoder(
                edge=m,
                inputs=refs,
                input_sizes=self._table_dims(sizes, m),
                table=tuple(table),
                output_size=sizes[m],
            )
        return NetworkCode(
            problem=self.problem,
            source_alphabets={s: sizes[s] for s in self.sessions},
            edge_alphabets={m: sizes[m] for m in self.messages},
            randomness={
                node: NodeRandomness.uniform(node, sizes[f"V_{node}"])
                for node in self.rnodes
            },
            encoders=encoders,
        )


def exhaustive_search(
    problem: NetworkProblem,
    alphabet_bounds: Union[int, Mapping[str, int]] = 2,
    allow_randomness: bool = False,
    budget: int = DEFAULT_SEARCH_BUDGET,
    threads: int = 1,
) -> SearchOutcome:
    """Enumerate encoder tables in lexicographic order; exact checks per code.

    The first admissible code in the deterministic enumeration order is
    returned, regardless of the worker count.  If the candidate budget is
    consumed first, the outcome reports the fraction searched.
    """
    plan = _SearchPlan(problem, alphabet_bounds, allow_randomness)
    total = plan.total_candidates()
    searched = 0
    for sizes in plan.size_assignments():
        block = plan.candidates_for(sizes)
        if block == 0:
            continue
        if searched + block > budget and block > 0:
            # Partial scan of this block up to the remaining budget.
            remaining = budget - searched
            found, scanned = _scan_block(plan, sizes, remaining, threads)
            searched += scanned
            if found is not None:
                return SearchOutcome("found", found, searched, total)
            return SearchOutcome("budget-exceeded", None, searched, total)
        found, scanned = _scan_block(plan, sizes, block, threads)
        searched += scanned
        if found is not None:
            return SearchOutcome("found", found, searched, total)
    return SearchOutcome("exhausted", None, searched, total)


def _scan_block(
    plan: _SearchPlan, sizes: Mapping[str, int], limit: int, threads: int
) -> tuple[Optional[NetworkCode], int]:
    spaces = []
    for m in plan.messages:
        dims = plan._table_dims(sizes, m)
        entries = math.prod(dims) if dims else 0
        out = sizes[m]
        spaces.append([tuple(t) for t in itertools.product(range(out), repeat=entries)])
    if threads <= 1 or not spaces or len(spaces[0]) < 2 * threads:
        scanned = 0
        for tables in itertools.product(*spaces):
            if scanned >= limit:
                return None, scanned
            scanned += 1
            if plan.admissible_tables(sizes, tables):
                return plan.realize(sizes, tables), scanned
        return None, scanned
    # Partition the first table space into contiguous slices; the earliest
    # slice containing a hit wins, preserving the lexicographic contract.
    from concurrent.futures import ThreadPoolExecutor

    first = spaces[0]
    rest = spaces[1:]
    chunk = (len(first) + threads - 1) // threads
    rest_block = math.prod(len(s) for s in rest) if rest else 1
    slices = [first[i : i + chunk] for i in range(0, len(first), chunk)]
    lock = threading.Lock()
    state = {"scanned": 0, "stop_at": None}

    def work(slice_idx: int, head: list) -> tuple[int, Optional[tuple]]:
        local = 0
        for hi, h in enumerate(head):
            for tail in itertools.product(*rest):
                with lock:
                    if state["stop_at"] is not None and slice_idx > state["stop_at"]:
                        return local, None
                    if state["scanned"] >= limit:
                        return local, None
                    state["scanned"] += 1
                local += 1
                if plan.admissible_tables(sizes, (h,) + tail):
                    with lock:
                        if state["stop_at"] is None or slice_idx < state["stop_at"]:
                            state["stop_at"] = slice_idx
                    return local, (h,) + tail
        return local, None

    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(work, i, sl) for i, sl in enumerate(slices)]
        results = [f.result() for f in futures]
    for _, tables in results:
        if tables is not None:
            return plan.realize(sizes, tables), state["scanned"]
    return None, state["scanned"]


def _nest(table: Sequence[int], dims: Sequence[int]):
    if not dims:
        return table[0]
    if len(dims) == 1:
        return list(table)
    step = len(table) // dims[0]
    return [_nest(table[i * step : (i + 1) * step], dims[1:]) for i in range(dims[0])]


def _flatten(nested, dims: Sequence[int]) -> list[int]:
    if not dims:
        return [int(nested)]
    if len(dims) == 1:
        return [int(v) for v in nested]
    out: list[int] = []
    for sub in nested:
        out.extend(_flatten(sub, dims[1:]))
    return out


def code_to_json(code: NetworkCode) -> str:
    doc = {
        "sources": {k: v for k, v in sorted(code.source_alphabets.items())},
        "edges": {k: v for k, v in sorted(code.edge_alphabets.items())},
        "randomness": {
            node: {"pmf": [str(p) for p in rnd.pmf]}
            for node, rnd in sorted(code.randomness.items())
        },
        "encoders": {
            eid: {
                "inputs": [list(ref) for ref in enc.inputs],
                "table": _nest(enc.table, enc.input_sizes),
            }
            for eid, enc in sorted(code.encoders.items())
        },
    }
    return json.dumps(doc, indent=2)


def code_from_json(problem: NetworkProblem, text: str) -> NetworkCode:
    doc = json.loads(text)
    randomness = {
        node: NodeRandomness(node, tuple(as_fraction(p) for p in entry["pmf"]))
        for node, entry in doc.get("randomness", {}).items()
    }
    sources = {k: int(v) for k, v in doc["sources"].items()}
    edges = {k: int(v) for k, v in doc["edges"].items()}
    has_rnd = lambda node: node in randomness
    encoders = {}
    for eid, entry in doc["encoders"].items():
        refs = tuple((kind, name) for kind, name in entry["inputs"])
        expected = canonical_inputs(problem, eid, has_rnd)
        if refs != expected:
            raise ValueError(f"encoder of {eid} lists inputs {refs}, expected {expected}")
        sizes = []
        for kind, name in refs:
            if kind == "session":
                sizes.append(sources[name])
            elif kind == "edge":
                sizes.append(edges[problem.network.message_of(name)])
            else:
                sizes.append(randomness[name].size)
        table = tuple(_flatten(entry["table"], sizes))
        encoders[eid] = LocalEncoder(eid, refs, tuple(sizes), table, edges[eid])
    return NetworkCode(
        problem=problem,
        source_alphabets=sources,
        edge_alphabets=edges,
        randomness=randomness,
        encoders=encoders,
    )
