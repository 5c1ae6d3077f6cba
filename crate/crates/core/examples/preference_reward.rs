//! Mode-preference penalty along a few hand-written mode sequences.

use pogmp::guidance::{preference_reward, RankTrace, RewardConfig};

fn main() {
    let w = RewardConfig::paper_defaults().mode_preference;
    let sequences: [(&str, &[u32]); 4] = [
        ("nominal", &[0, 0, 1, 1, 2, 2]),
        ("lost the ball", &[0, 1, 1, 0, 0, 1]),
        ("recovery after detach", &[0, 1, 2, 0, 1, 2]),
        ("stuck in reach", &[0, 0, 0, 0, 0, 0]),
    ];
    for (name, ranks) in sequences {
        let mut trace = RankTrace::default();
        let penalties: Vec<f64> = ranks
            .iter()
            .map(|&r| {
                let (ind, next) = preference_reward(trace, r);
                trace = next;
                if ind > 0.0 { w } else { 0.0 }
            })
            .collect();
        println!("{name:<22} ranks {ranks:?}  penalty {penalties:?}");
    }
}
