use std::collections::BTreeSet;

use gamechurn_core::synth::{generate, GenConfig};
use gamechurn_core::SECONDS_PER_DAY;

#[test]
fn churner_count_matches_rate() {
    let cfg = GenConfig { seed: 7, n_players: 2000, churn_rate: 0.3, ..GenConfig::default() };
    let data = generate(&cfg).unwrap();
    let churners = data.truth.iter().filter(|t| t.churned).count();
    assert!((560..=640).contains(&churners), "{churners}");
}

#[test]
fn weekend_intensity_follows_boost() {
    let cfg = GenConfig { seed: 5, n_players: 1000, churn_rate: 0.0, weekend_boost: 1.5, ..GenConfig::default() };
    let data = generate(&cfg).unwrap();
    let obs = data.layout.observation;
    // Mean events per active player-day, by day type.
    let mut active: BTreeSet<(String, i64)> = BTreeSet::new();
    let (mut we_events, mut wd_events) = (0.0, 0.0);
    for e in data.events.iter().filter(|e| obs.contains(e.timestamp)) {
        let day = e.timestamp.secs().div_euclid(SECONDS_PER_DAY);
        active.insert((e.account_id.clone(), day));
        if e.timestamp.weekday_from_monday() >= 5 {
            we_events += 1.0;
        } else {
            wd_events += 1.0;
        }
    }
    let we_days = active.iter().filter(|(_, d)| (d + 3).rem_euclid(7) >= 5).count() as f64;
    let wd_days = active.len() as f64 - we_days;
    let ratio = (we_events / we_days) / (wd_events / wd_days);
    assert!((1.35..=1.65).contains(&ratio), "weekend/weekday intensity ratio {ratio}");
}
