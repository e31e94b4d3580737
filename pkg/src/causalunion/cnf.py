"""CNF formula container with named atoms and DIMACS export.

Atoms are arbitrary hashable tuples (e.g. ("edge", "X", "Y")); the registry
assigns each a positive integer.  Clauses are lists of signed ints in DIMACS
convention.  Helper methods emit Tseitin-style biconditional definitions so a
defined atom is fully equivalent to its formula, which keeps backbone queries
over defined atoms exact.
"""

from __future__ import annotations

import json


class VarRegistry:
    def __init__(self):
        self._by_atom = {}
        self._by_id = {}

    def var(self, atom):
        v = self._by_atom.get(atom)
        if v is None:
            v = len(self._by_atom) + 1
            self._by_atom[atom] = v
            self._by_id[v] = atom
        return v

    def lookup(self, atom):
        return self._by_atom.get(atom)

    def atom(self, var_id):
        return self._by_id[var_id]

    def __len__(self):
        return len(self._by_atom)

    def __contains__(self, atom):
        return atom in self._by_atom

    def atoms(self):
        return list(self._by_atom)


class Cnf:
    def __init__(self, registry=None):
        self.registry = registry or VarRegistry()
        self.clauses = []

    @property
    def num_vars(self):
        return len(self.registry)

    def lit(self, atom, positive=True):
        v = self.registry.var(atom)
        return v if positive else -v

    def add(self, clause):
        self.clauses.append(list(clause))

    def add_implies(self, premise_lits, conclusion_lit):
        """premise1 AND premise2 ... -> conclusion."""
        self.add([-l for l in premise_lits] + [conclusion_lit])

    def add_iff_or(self, lit, disjuncts):
        """lit <-> OR(disjuncts)."""
        self.add([-lit] + list(disjuncts))
        for d in disjuncts:
            self.add([lit, -d])

    def add_iff_and(self, lit, conjuncts):
        """lit <-> AND(conjuncts)."""
        self.add([lit] + [-c for c in conjuncts])
        for c in conjuncts:
            self.add([-lit, c])

    def to_dimacs(self):
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        for c in self.clauses:
            lines.append(" ".join(map(str, c)) + " 0")
        return "\n".join(lines) + "\n"

    def atom_map_json(self):
        return json.dumps(
            {str(v): list(self.registry.atom(v)) for v in range(1, self.num_vars + 1)},
            indent=2,
        )
