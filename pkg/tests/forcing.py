"""Placements every equilibrium of the scheduling gadgets must respect.

Restricting the search to them is sound because each one holds in every
equilibrium: the gadget's top-priority dummy jobs always sit first on their
machines, and the heavy block jobs never leave the machines reserved for them.
"""


def ne_gadget_placements(inst, dm):
    t = len(dm.triples)
    machines = [m.id for m in inst.machines]
    triplet = machines[4 : 4 + t]
    block = machines[3 : 4 + t]
    allowed = {"f": ["M4"]}
    allowed.update({j.id: triplet for j in inst.jobs if j.id.startswith("D")})
    allowed.update({j.id: block for j in inst.jobs if j.id.startswith("U")})
    return allowed


def cmax_gadget_placements(inst, dm):
    t = len(dm.triples)
    triplet = [m.id for m in inst.machines][2 : 2 + t]
    allowed = {"d1": ["M1"], "d2": ["M2"]}
    allowed.update({j.id: triplet for j in inst.jobs if j.id.startswith("D")})
    return allowed
