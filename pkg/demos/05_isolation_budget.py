"""
Sizing the optical isolation
============================

The worst transmitted peak fixes how many photons Eve can push through the
limiter per pulse. Isolators, attenuators and reflection loss together must
bring that down to the tolerated leakage.
"""
from limiter_lab import isolation
from limiter_lab.isolation import Catalog, LeakageBudget, check_stack, required_gamma, search_stacks

for rate in (40e6, 1e9):
    budget = LeakageBudget.worst_case(rate)
    exact = required_gamma(budget)
    rounded = required_gamma(budget, paper_rounding=True)
    print(f"{isolation.clock_label(rate):>7}: chi {budget.chi_photons:.3e} photons, "
          f"gamma {exact:.2f} dB exact, {rounded:.0f} dB rounded")

print()
print(isolation.table1(paper_rounding=True))

# A catalog with cheaper isolators: which stacks still pass at 1 GHz?
catalog = Catalog(isolator_db=(30, 40, 50), attenuator_db=(0, 10, 20), reflectivity_db=(20, 30, 40),
                  max_isolators=3)
need = required_gamma(LeakageBudget.worst_case(1e9), paper_rounding=True)
stacks = search_stacks(catalog, need)
print(f"{len(stacks)} stacks pass; the five leanest:")
for s in stacks[:5]:
    print(f"  {s.n_isolators} x {s.isolator_db:.0f} dB isolator, {s.attenuator_db:.0f} dB attenuator, "
          f"{s.reflectivity_db:.0f} dB reflection -> margin {check_stack(s, need).margin_db:.0f} dB")
