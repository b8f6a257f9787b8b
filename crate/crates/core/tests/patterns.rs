use std::collections::{BTreeMap, BTreeSet};

use persq_core::ingest::{Chronotype, DayRecord, UserProfile, UserSeries};
use persq_core::patterns::{
    apriori, default_thresholds, discretize, min_support_count, mine_all, prune_retained, quantile,
    read_patterns, split_groups, write_patterns, Item, Level, Pattern, PatternSets, SqGroup,
    ThresholdConfig, MINED_VARIABLES, SQ_HIGH_FRACTION, SQ_LOW_FRACTION,
};
use persq_core::synthetic::{carry_over_cohort, planted_transactions, CohortConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_force(transactions: &[BTreeSet<u8>], min_count: usize) -> BTreeMap<Vec<u8>, usize> {
    let universe: Vec<u8> = transactions
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut out = BTreeMap::new();
    for mask in 1u32..(1 << universe.len()) {
        let set: Vec<u8> = (0..universe.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| universe[i])
            .collect();
        let count = transactions
            .iter()
            .filter(|t| set.iter().all(|x| t.contains(x)))
            .count();
        if count >= min_count {
            out.insert(set, count);
        }
    }
    out
}

fn random_transactions(rng: &mut ChaCha8Rng) -> Vec<BTreeSet<u8>> {
    let n = rng.random_range(1..25);
    let items = rng.random_range(1..9u8);
    (0..n)
        .map(|_| (0..items).filter(|_| rng.random_bool(0.5)).collect())
        .collect()
}

#[test]
fn apriori_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..150 {
        let transactions = random_transactions(&mut rng);
        let frac = rng.random_range(0.05..1.0);
        let found = apriori(&transactions, frac).unwrap();
        let expected = brute_force(&transactions, min_support_count(frac, transactions.len()));
        let got: BTreeMap<Vec<u8>, usize> =
            found.iter().map(|s| (s.items.clone(), s.count)).collect();
        assert_eq!(got.len(), found.len(), "case {case}: duplicate itemsets");
        assert_eq!(got, expected, "case {case}");
    }
}

#[test]
fn supports_are_anti_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let transactions = random_transactions(&mut rng);
        let found = apriori(&transactions, 0.1).unwrap();
        let index: BTreeMap<Vec<u8>, usize> =
            found.iter().map(|s| (s.items.clone(), s.count)).collect();
        for s in &found {
            for skip in 0..s.items.len() {
                let mut sub = s.items.clone();
                sub.remove(skip);
                if sub.is_empty() {
                    continue;
                }
                let parent = index
                    .get(&sub)
                    .expect("subsets of frequent sets are frequent");
                assert!(*parent >= s.count);
            }
        }
    }
}

#[test]
fn min_support_rounds_up() {
    assert_eq!(min_support_count(0.2, 10), 2);
    assert_eq!(min_support_count(0.2, 11), 3);
    assert_eq!(min_support_count(0.001, 10), 1);
    assert_eq!(min_support_count(1.0, 7), 7);
}

#[test]
fn three_transaction_fixture_keeps_longest_two_sizes() {
    let t: Vec<BTreeSet<char>> = ["AB", "AC", "ABC"]
        .iter()
        .map(|s| s.chars().collect())
        .collect();
    let found = apriori(&t, 2.0 / 3.0).unwrap();
    let got: Vec<(String, usize)> = found
        .iter()
        .map(|s| (s.items.iter().collect(), s.count))
        .collect();
    assert_eq!(
        got,
        vec![
            ("A".into(), 3),
            ("B".into(), 2),
            ("C".into(), 2),
            ("AB".into(), 2),
            ("AC".into(), 2)
        ]
    );
    let kept: Vec<String> = prune_retained(&found)
        .iter()
        .map(|s| s.items.iter().collect())
        .collect();
    assert_eq!(kept, vec!["A", "B", "C", "AB", "AC"]);
    let found = apriori(&t, 1.0 / 3.0).unwrap();
    let kept: Vec<String> = prune_retained(&found)
        .iter()
        .map(|s| s.items.iter().collect())
        .collect();
    assert_eq!(kept, vec!["AB", "AC", "BC", "ABC"]);
}

#[test]
fn planted_pattern_is_recovered_with_exact_support() {
    let planted = vec![
        Item::new("v1", "high"),
        Item::new("v3", "low"),
        Item::new("v6", "normal"),
    ];
    let fixture = planted_transactions(99, 400, 8, &planted, 0.35);
    let found = apriori(&fixture.transactions, 0.25).unwrap();
    let hit = found
        .iter()
        .find(|s| s.items == planted)
        .expect("planted itemset is frequent");
    assert_eq!(hit.count, fixture.planted_support);
    assert!(fixture.planted_support >= 140);
    let longest = found.iter().map(|s| s.items.len()).max().unwrap();
    assert_eq!(longest, 3);
}

fn profile(chronotype: Chronotype) -> UserProfile {
    UserProfile {
        user_id: "x".into(),
        age: 30,
        gender: persq_core::ingest::Gender::Male,
        chronotype,
    }
}

fn thresholds() -> ThresholdConfig {
    let mut variables = BTreeMap::new();
    for (name, v) in MINED_VARIABLES {
        if v.is_continuous() {
            variables.insert(name.to_string(), vec![10.0, 20.0]);
        }
    }
    variables.insert("mood".into(), vec![3.0]);
    variables.insert("stress".into(), vec![]);
    ThresholdConfig {
        sq: vec![80.0, 95.0],
        variables,
    }
}

#[test]
fn discretize_examples() {
    let th = thresholds();
    th.validate().unwrap();
    let mut day = DayRecord::empty("2020-01-01".parse().unwrap());
    day.steps = Some(10.0);
    day.distance = Some(20.0);
    day.calories = Some(9.99);
    day.mood = Some(3);
    day.stress = Some(5);
    let d = discretize(&day, &profile(Chronotype::A), &th);
    let items: BTreeSet<String> = d.transaction.iter().map(Item::to_string).collect();
    let expected: BTreeSet<String> = [
        "numsteps_normal",
        "distance_high",
        "calories_low",
        "mood_normal",
        "AorB_A",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    assert_eq!(items, expected);
    assert!(d.missing.contains(&"veryAct"));
    assert!(!d.missing.contains(&"stress"));
    assert!(!d.missing.contains(&"numsteps"));

    let b = discretize(&day, &profile(Chronotype::B), &th);
    assert!(b.transaction.contains(&Item::new("AorB", "B")));
}

#[test]
fn sq_groups_partition_the_days() {
    let th = thresholds();
    let samples: Vec<(BTreeSet<Item>, f64)> = [50.0, 79.99, 80.0, 90.0, 94.9, 95.0, 100.0]
        .iter()
        .map(|sq| (BTreeSet::from([Item::new("numsteps", "low")]), *sq))
        .collect();
    let groups = split_groups(&samples, &th);
    assert_eq!(groups.sizes(), [2, 3, 2]);
    assert_eq!(th.sq_group(80.0), SqGroup::Normal);
    assert_eq!(th.sq_group(95.0), SqGroup::High);
}

#[test]
fn mined_groups_cover_every_scored_day_once() {
    let data = carry_over_cohort(&CohortConfig::default());
    let th = default_thresholds(&data).unwrap();
    let outcome = mine_all(&data, &th, 0.2).unwrap();
    let scored: usize = data
        .iter()
        .map(|s| s.days().iter().filter(|d| d.sq.is_some()).count())
        .sum();
    assert_eq!(outcome.groups.sizes().iter().sum::<usize>(), scored);
    assert_eq!(outcome.days_without_sq, 0);
    for group in SqGroup::ALL {
        let transactions = outcome.groups.get(group);
        let patterns = outcome.patterns.get(group);
        assert!(!patterns.is_empty(), "{group}");
        let longest = patterns.iter().map(|p| p.items.len()).max().unwrap();
        let min_count = min_support_count(0.2, transactions.len());
        for p in patterns {
            assert!(p.items.len() + 1 >= longest);
            assert_eq!(p.group, group);
            let count = transactions
                .iter()
                .filter(|t| p.items.iter().all(|i| t.contains(i)))
                .count();
            assert_eq!(count, p.support_count);
            assert!(count >= min_count);
        }
        assert!(patterns
            .windows(2)
            .all(|w| w[0].canonical_cmp(&w[1]).is_le()));
    }
}

#[test]
fn default_sq_cuts_reproduce_group_proportions() {
    let data = carry_over_cohort(&CohortConfig {
        users: 10,
        days: 157,
        ..CohortConfig::default()
    });
    let th = default_thresholds(&data).unwrap();
    let sq: Vec<f64> = data
        .iter()
        .flat_map(|s| s.days())
        .filter_map(|d| d.sq)
        .collect();
    let n = sq.len() as f64;
    let low = sq
        .iter()
        .filter(|x| th.sq_group(**x) == SqGroup::Low)
        .count() as f64
        / n;
    let high = sq
        .iter()
        .filter(|x| th.sq_group(**x) == SqGroup::High)
        .count() as f64
        / n;
    assert!((low - SQ_LOW_FRACTION).abs() < 0.01, "{low}");
    assert!((high - SQ_HIGH_FRACTION).abs() < 0.01, "{high}");
}

#[test]
fn uniform_values_get_tercile_cuts() {
    let values: Vec<f64> = (1..=300).map(f64::from).collect();
    let c1 = quantile(&values, 1.0 / 3.0).unwrap();
    let c2 = quantile(&values, 2.0 / 3.0).unwrap();
    assert!((c1 - 100.667).abs() < 1e-3);
    assert!((c2 - 200.333).abs() < 1e-3);
    let levels: Vec<Level> = values
        .iter()
        .map(|x| Level::from_cuts(*x, &[c1, c2]))
        .collect();
    for level in Level::ALL {
        assert_eq!(levels.iter().filter(|l| **l == level).count(), 100);
    }
}

#[test]
fn constant_variables_are_left_out() {
    let data = carry_over_cohort(&CohortConfig {
        users: 2,
        days: 20,
        ..CohortConfig::default()
    });
    let days = data[0].days().iter().cloned().map(|mut d| {
        d.set(persq_core::ingest::Variable::Zone3Min, Some(4.0))
            .unwrap();
        d
    });
    let a = UserSeries::new(data[0].profile().clone(), days.collect()).unwrap();
    let days = data[1].days().iter().cloned().map(|mut d| {
        d.set(persq_core::ingest::Variable::Zone3Min, Some(4.0))
            .unwrap();
        d
    });
    let b = UserSeries::new(data[1].profile().clone(), days.collect()).unwrap();
    let th = default_thresholds(&[a.clone(), b]).unwrap();
    assert_eq!(th.cuts("InZone3"), Some(&[][..]));
    let d = discretize(&a.days()[0], a.profile(), &th);
    assert!(d.transaction.iter().all(|i| i.variable != "InZone3"));
    assert!(d.missing.is_empty());
}

#[test]
fn patterns_round_trip_through_csv() {
    let mut sets = PatternSets::default();
    sets.high.push(Pattern {
        items: vec![Item::new("AorB", "A"), Item::new("numsteps", "high")],
        support_count: 12,
        group: SqGroup::High,
    });
    sets.low.push(Pattern {
        items: vec![Item::new("stress", "high")],
        support_count: 4,
        group: SqGroup::Low,
    });
    let mut out = Vec::new();
    write_patterns(&mut out, &sets).unwrap();
    let text = String::from_utf8(out.clone()).unwrap();
    assert!(text.starts_with("group,items,support_count\n"));
    assert!(text.contains("high,AorB_A;numsteps_high,12"));
    assert_eq!(read_patterns(out.as_slice()).unwrap(), sets);
}

#[test]
fn thresholds_round_trip_and_override() {
    let data = carry_over_cohort(&CohortConfig::default());
    let th = default_thresholds(&data).unwrap();
    let text = th.to_toml_string().unwrap();
    assert_eq!(ThresholdConfig::from_toml_str(&text).unwrap(), th);
    let mut changed = th.clone();
    changed
        .apply_overrides("numsteps = [5000.0, 9000.0]\n")
        .unwrap();
    assert_eq!(changed.cuts("numsteps"), Some(&[5000.0, 9000.0][..]));
    assert_eq!(changed.sq, th.sq);
    assert!(changed
        .clone()
        .apply_overrides("numsteps = [9000.0, 5000.0]\n")
        .is_err());
    assert!(changed.apply_overrides("bogus = [1.0]\n").is_err());
}

#[test]
fn items_parse_from_their_display_form() {
    for s in ["numsteps_low", "InZone2_high", "AorB_B"] {
        assert_eq!(s.parse::<Item>().unwrap().to_string(), s);
    }
    assert!("nounderscore".parse::<Item>().is_err());
    assert!("x_".parse::<Item>().is_err());
}
