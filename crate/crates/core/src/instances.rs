//! Built-in worked examples used as test anchors and by the CLI's
//! `--builtin-instances` flag. Member labels are kept as written; ids are
//! dense in label order.

use crate::model::PreferenceNetwork;
use crate::subset::SubsetMask;

fn one_based(lists: &[&[usize]]) -> PreferenceNetwork {
    PreferenceNetwork::from_one_based(lists).expect("built-in instance is valid")
}

fn lettered(labels: &str, lists: &[&str]) -> PreferenceNetwork {
    let ls: Vec<String> = labels.chars().map(|c| c.to_string()).collect();
    let lists = lists.iter().map(|l| l.chars().map(|c| labels.find(c).expect("known label")).collect()).collect();
    PreferenceNetwork::from_labeled_lists(ls, lists).expect("built-in instance is valid")
}

/// Six members where `{1,2,3}` is a B³CT community and `{1,5,6}` is both a
/// B³CT and a harmonious community that fails group stability.
pub fn b3ct_profile() -> PreferenceNetwork {
    one_based(&[
        &[1, 4, 2, 3, 5, 6],
        &[2, 5, 3, 4, 1, 6],
        &[6, 3, 1, 4, 2, 5],
        &[4, 5, 6, 1, 2, 3],
        &[1, 5, 6, 4, 2, 3],
        &[1, 6, 5, 4, 2, 3],
    ])
}

/// [`b3ct_profile`] after members 2 and 3 promote each other; `{1,2,3}`
/// loses B³CT membership because member 4 now gets three votes.
pub fn b3ct_profile_alt() -> PreferenceNetwork {
    one_based(&[
        &[1, 4, 2, 3, 5, 6],
        &[2, 3, 4, 5, 1, 6],
        &[3, 1, 4, 6, 2, 5],
        &[4, 5, 6, 1, 2, 3],
        &[1, 5, 6, 4, 2, 3],
        &[1, 6, 5, 4, 2, 3],
    ])
}

/// `{1,2,3,4}` is a Borda and B³CT community but not weakly group stable
/// (`G = {3,4}`, `G' = {5,6}`). Members 5 and 6 are free; these orders
/// are one fixed choice.
pub fn weak_gs_profile() -> PreferenceNetwork {
    one_based(&[
        &[1, 2, 5, 4, 6, 3],
        &[1, 2, 6, 3, 5, 4],
        &[3, 4, 1, 2, 5, 6],
        &[3, 4, 1, 2, 5, 6],
        &[5, 6, 1, 2, 3, 4],
        &[6, 5, 1, 2, 3, 4],
    ])
}

/// Three profiles on `{a,b,c,d,e}` used against weighted schemas with
/// `S = {a,b,c}`; members `d` and `e` rank themselves first arbitrarily.
pub fn impossibility_profiles() -> [PreferenceNetwork; 3] {
    [
        lettered("abcde", &["adebc", "abcde", "abcde", "deabc", "edabc"]),
        lettered("abcde", &["abdce", "abdce", "caebd", "deabc", "edabc"]),
        lettered("abcde", &["abdce", "dcabe", "cbaed", "deabc", "edabc"]),
    ]
}

pub const IMPOSSIBILITY_S: SubsetMask = SubsetMask(0b00111);

/// `{a,b}` has unanimous `a > c` yet harmonious aggregation ties them.
/// Member `c`'s order is free.
pub fn unanimity_counterexample() -> PreferenceNetwork {
    lettered("abc", &["acb", "bac", "cab"])
}

/// Named lookup for the CLI.
pub fn by_name(name: &str) -> Option<PreferenceNetwork> {
    Some(match name {
        "b3ct" => b3ct_profile(),
        "b3ct-alt" => b3ct_profile_alt(),
        "weak-gs" => weak_gs_profile(),
        "impossibility-1" => impossibility_profiles()[0].clone(),
        "impossibility-2" => impossibility_profiles()[1].clone(),
        "impossibility-3" => impossibility_profiles()[2].clone(),
        "unanimity" => unanimity_counterexample(),
        _ => return None,
    })
}

pub const NAMES: &[&str] =
    &["b3ct", "b3ct-alt", "weak-gs", "impossibility-1", "impossibility-2", "impossibility-3", "unanimity"];
