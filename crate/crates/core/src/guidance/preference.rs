/// Per-episode record of the highest mode rank seen so far.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RankTrace {
    pub max_rank_so_far: Option<u32>,
    pub current_rank: Option<u32>,
}

impl RankTrace {
    /// Record `rank` and report whether it falls below the running maximum
    /// (compared before the maximum is updated).
    pub fn observe(&mut self, rank: u32) -> bool {
        let violated = self.max_rank_so_far.is_some_and(|m| rank < m);
        self.max_rank_so_far = Some(self.max_rank_so_far.map_or(rank, |m| m.max(rank)));
        self.current_rank = Some(rank);
        violated
    }
}

/// Preference indicator `1(m_t < max_{τ≤t} m_τ)` and the updated trace.
/// The reward contribution is this indicator times the (negative)
/// preference weight.
pub fn preference_reward(trace: RankTrace, new_rank: u32) -> (f64, RankTrace) {
    let mut next = trace;
    let violated = next.observe(new_rank);
    (if violated { 1.0 } else { 0.0 }, next)
}
