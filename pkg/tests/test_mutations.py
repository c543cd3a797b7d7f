from mutate import all_mutants, deletion_mutants, mp_retarget_mutants, referenced_indices
from yablo.corpus import KERNEL_ORDER
from yablo.kernel import check_kernel_script
from yablo.syntax import base_signature


def test_reference_scan_includes_block_targets(registry):
    script = registry.script("lem_yj_box_step")
    assert referenced_indices(script) == [1, 2, 3, 4, 5]


def test_both_families_fire_on_a_small_script(registry):
    script = registry.script("lem_yj_box_step")
    assert len(list(deletion_mutants(script))) == 5
    assert len(list(mp_retarget_mutants(script))) >= 2


def test_every_mutant_is_rejected_and_localized(registry):
    totals = {"checked": 0}
    survivors = []
    unlocalized = []
    for name in KERNEL_ORDER:
        original = registry.script(name)
        assert registry.check(name).ok, name
        for label, mutant in all_mutants(original):
            report = check_kernel_script(mutant, base_signature(), registry.axioms)
            totals["checked"] += 1
            if report.ok:
                survivors.append(label)
            elif report.first() is None or report.first().step is None:
                unlocalized.append(label)
    assert totals["checked"] >= 50
    assert not survivors, survivors[:10]
    assert not unlocalized, unlocalized[:10]
