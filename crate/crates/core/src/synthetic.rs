//! Seeded synthetic cohorts and fixtures with known ground truth.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ingest::{
    Chronotype, DayRecord, Gender, IngestError, UserProfile, UserSeries, Variable,
};
use crate::patterns::Item;

/// Sleep quality depends on standardized daily steps of the `lag` previous
/// days with weights decreasing linearly from 2.0; the target day itself
/// has no effect.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortConfig {
    pub users: usize,
    pub days: usize,
    pub start: NaiveDate,
    pub lag: usize,
    pub base_sq: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            users: 5,
            days: 80,
            start: NaiveDate::from_ymd_opt(2019, 11, 1).expect("valid date"),
            lag: 3,
            base_sq: 88.0,
            noise_sd: 0.5,
            seed: 2019,
        }
    }
}

impl CohortConfig {
    pub fn lag_weights(&self) -> Vec<f64> {
        (1..=self.lag)
            .map(|k| 2.0 * (self.lag + 1 - k) as f64 / self.lag as f64)
            .collect()
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("positive standard deviation")
}

/// Cohort with a planted multi-day carry-over from activity to sleep.
pub fn carry_over_cohort(cfg: &CohortConfig) -> Vec<UserSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights = cfg.lag_weights();
    let noise = normal(cfg.noise_sd.max(f64::MIN_POSITIVE));
    let unit = normal(1.0);
    (0..cfg.users)
        .map(|u| {
            let profile = UserProfile {
                user_id: format!("u{:02}", u + 1),
                age: rng.random_range(25..=60),
                gender: if u % 2 == 0 {
                    Gender::Male
                } else {
                    Gender::Female
                },
                chronotype: if u % 3 == 0 {
                    Chronotype::B
                } else {
                    Chronotype::A
                },
            };
            let z: Vec<f64> = (0..cfg.days + cfg.lag)
                .map(|_| unit.sample(&mut rng))
                .collect();
            let days = (0..cfg.days)
                .map(|m| {
                    let zi = z[m + cfg.lag];
                    let date = cfg.start + Days::new(m as u64);
                    let mut d = DayRecord::empty(date);
                    let steps = (8000.0 + 2500.0 * zi).max(0.0).round();
                    d.steps = Some(steps);
                    d.distance = Some(round2(steps * 0.00075));
                    d.calories = Some(
                        round2(1700.0 + 0.045 * steps + normal(50.0).sample(&mut rng)).max(0.0),
                    );
                    d.very_active_min =
                        Some(round2(20.0 + 12.0 * zi + normal(5.0).sample(&mut rng)).max(0.0));
                    d.moderately_active_min =
                        Some(round2(15.0 + 8.0 * zi + normal(5.0).sample(&mut rng)).max(0.0));
                    d.lightly_active_min =
                        Some(round2(180.0 + normal(40.0).sample(&mut rng)).max(0.0));
                    d.sedentary_min = Some(round2(700.0 + normal(60.0).sample(&mut rng)).max(0.0));
                    d.hr_zone_min = [
                        Some(round2(1000.0 + normal(50.0).sample(&mut rng)).max(0.0)),
                        Some(round2(60.0 + 20.0 * zi + normal(10.0).sample(&mut rng)).max(0.0)),
                        Some(round2(20.0 + 8.0 * zi + normal(4.0).sample(&mut rng)).max(0.0)),
                        Some(round2(5.0 + 4.0 * zi + normal(2.0).sample(&mut rng)).max(0.0)),
                    ];
                    d.fatigue = Some(rng.random_range(1..=5));
                    d.mood = Some(rng.random_range(1..=5));
                    d.readiness = Some(rng.random_range(1..=10));
                    d.soreness = Some(rng.random_range(1..=5));
                    d.stress = Some(rng.random_range(1..=5));
                    let carry: f64 = weights
                        .iter()
                        .enumerate()
                        .map(|(k, w)| w * z[m + cfg.lag - (k + 1)].tanh())
                        .sum();
                    let sq = (cfg.base_sq + carry + noise.sample(&mut rng)).clamp(40.0, 100.0);
                    d.time_in_bed = Some(480.0);
                    d.minutes_asleep = Some(round2(sq * 4.8));
                    d.refresh_sq().expect("asleep never exceeds time in bed");
                    d
                })
                .collect();
            UserSeries::new(profile, days).expect("dates are increasing")
        })
        .collect()
}

/// 16 users resembling the public lifelog cohort; the last one never
/// records lightly active minutes and is therefore excluded on ingest.
pub fn pmdata_like(seed: u64) -> Vec<UserSeries> {
    let cfg = CohortConfig {
        users: 16,
        days: 30,
        seed,
        ..CohortConfig::default()
    };
    let mut cohort = carry_over_cohort(&cfg);
    let last = cohort.pop().expect("16 users");
    let days = last
        .days()
        .iter()
        .cloned()
        .map(|mut d| {
            d.lightly_active_min = None;
            d
        })
        .collect();
    cohort.push(UserSeries::new(last.profile().clone(), days).expect("dates are increasing"));
    cohort
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes each user as a raw source directory (`profile.toml`,
/// `activity.csv`, `wellness.csv`, `sleep.csv`) readable by the ingest step.
pub fn write_sources(dir: &Path, cohort: &[UserSeries]) -> Result<(), IngestError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| IngestError::Io { path, source }
    };
    for series in cohort {
        let user_dir = dir.join(series.user_id());
        fs::create_dir_all(&user_dir).map_err(io(&user_dir))?;
        let p = series.profile();
        let profile = format!(
            "user_id = \"{}\"\nage = {}\ngender = \"{}\"\nchronotype = \"{}\"\n",
            p.user_id,
            p.age,
            p.gender.as_str(),
            p.chronotype.as_str()
        );
        let path = user_dir.join("profile.toml");
        fs::write(&path, profile).map_err(io(&path))?;

        let mut activity = String::from("date");
        for v in Variable::ACTIVITY {
            activity.push(',');
            activity.push_str(v.column());
        }
        activity.push('\n');
        let mut wellness = String::from("datetime");
        for v in Variable::WELLNESS {
            wellness.push(',');
            wellness.push_str(v.column());
        }
        wellness.push('\n');
        let mut sleep = String::from("date,minutes_asleep,time_in_bed\n");
        for d in series.days() {
            let row: Vec<String> = Variable::ACTIVITY.iter().map(|v| cell(d.get(*v))).collect();
            activity.push_str(&format!("{},{}\n", d.date, row.join(",")));
            let row: Vec<String> = Variable::WELLNESS.iter().map(|v| cell(d.get(*v))).collect();
            wellness.push_str(&format!("{}T08:00:00,{}\n", d.date, row.join(",")));
            if let (Some(a), Some(b)) = (d.minutes_asleep, d.time_in_bed) {
                sleep.push_str(&format!("{},{a},{b}\n", d.date));
            }
        }
        for (name, body) in [
            ("activity.csv", activity),
            ("wellness.csv", wellness),
            ("sleep.csv", sleep),
        ] {
            let path = user_dir.join(name);
            let mut f = fs::File::create(&path).map_err(io(&path))?;
            f.write_all(body.as_bytes()).map_err(io(&path))?;
        }
    }
    Ok(())
}

/// Random transactions with one planted itemset and its exact support.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedFixture {
    pub transactions: Vec<BTreeSet<Item>>,
    pub planted: Vec<Item>,
    /// Transactions containing every planted item, whether injected or by chance.
    pub planted_support: usize,
}

/// `n` transactions over `variables` variables with uniformly random
/// low/normal/high levels; the items in `planted` are forced into
/// `round(fraction * n)` of them.
pub fn planted_transactions(
    seed: u64,
    n: usize,
    variables: usize,
    planted: &[Item],
    fraction: f64,
) -> PlantedFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = ["low", "normal", "high"];
    let mut transactions: Vec<BTreeSet<Item>> = (0..n)
        .map(|_| {
            (0..variables)
                .map(|v| Item::new(format!("v{v}"), levels[rng.random_range(0..3)]))
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let injected = ((fraction * n as f64).round() as usize).min(n);
    for &i in &order[..injected] {
        let tx = &mut transactions[i];
        for item in planted {
            tx.retain(|x| x.variable != item.variable);
            tx.insert(item.clone());
        }
    }
    let planted_support = transactions
        .iter()
        .filter(|tx| planted.iter().all(|p| tx.contains(p)))
        .count();
    PlantedFixture {
        transactions,
        planted: planted.to_vec(),
        planted_support,
    }
}
