"""Embedded CDCL SAT solver with incremental solving under assumptions, plus
backbone extraction over a chosen subset of variables.

Features: two-watched-literal propagation, first-UIP clause learning, VSIDS
branching with phase saving, and Luby-sequence restarts.  Clauses can be added
between solve calls; learned clauses are kept.  Assumptions are treated as
forced decisions at the bottom of the trail.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def luby(i):
    """i-th element (1-based) of the Luby restart sequence 1,1,2,1,1,2,4,..."""
    x = i - 1
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


class CdclSolver:
    def __init__(self):
        self.num_vars = 0
        self.clauses = []  # each clause is a list of lits; c[0], c[1] watched
        self.watches = {}  # lit -> indices of clauses currently watching lit
        self.assign = [0]  # 1-based: 0 unassigned, 1 true, -1 false
        self.level = [0]
        self.reason = [None]  # clause index that implied the var, or None
        self.activity = [0.0]
        self.saved_phase = [False]
        self.var_inc = 1.0
        self.var_decay = 0.95
        self.trail = []
        self.trail_lim = []
        self.prop_head = 0
        self.unsat = False  # unsat regardless of assumptions
        self.model = [False]

    def ensure_vars(self, n):
        while self.num_vars < n:
            self.num_vars += 1
            self.assign.append(0)
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.saved_phase.append(False)

    def value(self, lit):
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    def add_clause(self, lits):
        """Add a clause (call between solves); returns False on level-0 conflict."""
        if self.unsat:
            return False
        self.cancel_until(0)
        self.ensure_vars(max(map(abs, lits), default=0))
        out = []
        for l in set(lits):
            if -l in lits:
                return True  # tautology
            v = self.value(l)
            if v == 1:
                return True  # already satisfied at level 0
            if v == 0:
                out.append(l)
        if not out:
            self.unsat = True
            return False
        if len(out) == 1:
            self.enqueue(out[0], None)
            if self.propagate() is not None:
                self.unsat = True
                return False
            return True
        idx = len(self.clauses)
        self.clauses.append(out)
        self.watches.setdefault(out[0], []).append(idx)
        self.watches.setdefault(out[1], []).append(idx)
        return True

    # -- trail ------------------------------------------------------------

    def decision_level(self):
        return len(self.trail_lim)

    def enqueue(self, lit, reason_idx):
        v = abs(lit)
        self.assign[v] = 1 if lit > 0 else -1
        self.level[v] = self.decision_level()
        self.reason[v] = reason_idx
        self.saved_phase[v] = lit > 0
        self.trail.append(lit)

    def new_level(self):
        self.trail_lim.append(len(self.trail))

    def cancel_until(self, lvl):
        if self.decision_level() <= lvl:
            return
        limit = self.trail_lim[lvl]
        for lit in reversed(self.trail[limit:]):
            v = abs(lit)
            self.assign[v] = 0
            self.reason[v] = None
        del self.trail[limit:]
        del self.trail_lim[lvl:]
        self.prop_head = len(self.trail)

    # -- propagation ------------------------------------------------------

    def propagate(self):
        """Unit propagation; returns a conflicting clause index or None."""
        while self.prop_head < len(self.trail):
            false_lit = -self.trail[self.prop_head]
            self.prop_head += 1
            watchlist = self.watches.get(false_lit)
            if not watchlist:
                continue
            i = 0
            while i < len(watchlist):
                ci = watchlist[i]
                clause = self.clauses[ci]
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self.value(first) == 1:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(clause)):
                    if self.value(clause[k]) != -1:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches.setdefault(clause[1], []).append(ci)
                        watchlist[i] = watchlist[-1]
                        watchlist.pop()
                        moved = True
                        break
                if moved:
                    continue
                if self.value(first) == -1:
                    self.prop_head = len(self.trail)
                    return ci
                self.enqueue(first, ci)
                i += 1
        return None

    # -- conflict analysis ------------------------------------------------

    def bump(self, v):
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100

    def analyze(self, conflict_idx):
        """First-UIP learning; returns (learned clause, backjump level).

        The implied literal of a reason clause is always at index 0, because
        watch moves never displace a true watched literal.
        """
        seen = set()
        learned = []
        counter = 0
        lit = None
        clause = self.clauses[conflict_idx]
        idx = len(self.trail) - 1
        cur_level = self.decision_level()
        while True:
            for q in clause[0 if lit is None else 1:]:
                v = abs(q)
                if v in seen or self.level[v] == 0:
                    continue
                seen.add(v)
                self.bump(v)
                if self.level[v] == cur_level:
                    counter += 1
                else:
                    learned.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            lit = self.trail[idx]
            idx -= 1
            seen.discard(abs(lit))
            counter -= 1
            if counter == 0:
                break
            clause = self.clauses[self.reason[abs(lit)]]
        learned.insert(0, -lit)
        if len(learned) == 1:
            return learned, 0
        levels = sorted((self.level[abs(l)] for l in learned[1:]), reverse=True)
        back = levels[0]
        for k in range(1, len(learned)):
            if self.level[abs(learned[k])] == back:
                learned[1], learned[k] = learned[k], learned[1]
                break
        return learned, back

    def record_learned(self, learned):
        if len(learned) == 1:
            self.enqueue(learned[0], None)
            return
        idx = len(self.clauses)
        self.clauses.append(learned)
        self.watches.setdefault(learned[0], []).append(idx)
        self.watches.setdefault(learned[1], []).append(idx)
        self.enqueue(learned[0], idx)

    # -- branching --------------------------------------------------------

    def pick_branch(self):
        best, best_act = 0, -1.0
        for v in range(1, self.num_vars + 1):
            if self.assign[v] == 0 and self.activity[v] > best_act:
                best, best_act = v, self.activity[v]
        if best == 0:
            return 0
        return best if self.saved_phase[best] else -best

    # -- main loop --------------------------------------------------------

    def solve(self, assumptions=()):
        """True iff satisfiable under assumptions; on True, self.model holds
        a satisfying assignment indexed by variable."""
        if self.unsat:
            return False
        assumptions = list(assumptions)
        self.cancel_until(0)
        conflicts = 0
        restarts = 0
        budget = 64 * luby(1)
        while True:
            conflict = self.propagate()
            if conflict is not None:
                if self.decision_level() == 0:
                    self.unsat = True
                    return False
                conflicts += 1
                learned, back = self.analyze(conflict)
                self.cancel_until(back)
                self.record_learned(learned)
                self.var_inc /= self.var_decay
                if conflicts >= budget:
                    restarts += 1
                    budget = conflicts + 64 * luby(restarts + 1)
                    self.cancel_until(0)
                continue
            lvl = self.decision_level()
            if lvl < len(assumptions):
                a = assumptions[lvl]
                self.ensure_vars(abs(a))
                if self.value(a) == 1:
                    self.new_level()
                    continue
                if self.value(a) == -1:
                    self.cancel_until(0)
                    return False
                self.new_level()
                self.enqueue(a, None)
                continue
            lit = self.pick_branch()
            if lit == 0:
                self.model = [False] + [
                    self.assign[v] == 1 for v in range(1, self.num_vars + 1)
                ]
                self.cancel_until(0)
                return True
            self.new_level()
            self.enqueue(lit, None)

    def model_value(self, lit):
        v = self.model[abs(lit)]
        return v if lit > 0 else not v


def solver_for(cnf):
    """Build a solver loaded with the clauses of a Cnf; None if trivially unsat."""
    s = CdclSolver()
    s.ensure_vars(cnf.num_vars)
    for c in cnf.clauses:
        if not s.add_clause(c):
            return None
    return s


def solve_cnf(cnf, assumptions=()):
    s = solver_for(cnf)
    if s is None or not s.solve(assumptions):
        return None
    return s


@dataclass
class BackboneReport:
    forced_true: set = field(default_factory=set)
    forced_false: set = field(default_factory=set)
    free: set = field(default_factory=set)


def backbone(solver, variables, assumptions=()):
    """Classify each variable as forced true, forced false, or free over the
    models of the solver's clauses (under the given assumptions).

    Model-intersection pruning: one initial solve, then at most one solve per
    surviving candidate, so at most len(variables) + 1 solver calls.
    """
    report = BackboneReport()
    if not solver.solve(assumptions):
        raise ValueError("formula is unsatisfiable; backbone undefined")
    candidates = {v: solver.model[v] for v in variables}
    while candidates:
        v, val = next(iter(candidates.items()))
        lit = v if val else -v
        if solver.solve(list(assumptions) + [-lit]):
            del candidates[v]
            report.free.add(v)
            drop = [u for u, uval in candidates.items() if solver.model[u] != uval]
            for u in drop:
                del candidates[u]
                report.free.add(u)
        else:
            del candidates[v]
            (report.forced_true if val else report.forced_false).add(v)
    return report
