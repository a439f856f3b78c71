use std::collections::HashMap;

use crate::api::LeaderboardEntry;
use crate::clock::Timestamp;

/// Running totals across all sessions, fed by reveals.
#[derive(Debug, Clone, Default)]
pub struct Leaderboard {
    entries: HashMap<String, LeaderboardEntry>,
}

impl Leaderboard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, player_id: &str, display_name: &str, points: f64, at: Timestamp) {
        let entry = self
            .entries
            .entry(player_id.to_string())
            .or_insert_with(|| LeaderboardEntry {
                player_id: player_id.to_string(),
                display_name: display_name.to_string(),
                total_points: 0.0,
                rounds_played: 0,
                last_update: at,
            });
        entry.display_name = display_name.to_string();
        entry.total_points += points;
        entry.rounds_played += 1;
        entry.last_update = at;
    }

    pub fn get(&self, player_id: &str) -> Option<&LeaderboardEntry> {
        self.entries.get(player_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries by total descending, then earlier `last_update`, then player id.
    pub fn top(&self, top_n: Option<usize>) -> Vec<LeaderboardEntry> {
        let mut all: Vec<LeaderboardEntry> = self.entries.values().cloned().collect();
        all.sort_by(|a, b| {
            b.total_points
                .total_cmp(&a.total_points)
                .then(a.last_update.cmp(&b.last_update))
                .then_with(|| a.player_id.cmp(&b.player_id))
        });
        if let Some(n) = top_n {
            all.truncate(n);
        }
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone, Utc};

    fn t(secs: i64) -> Timestamp {
        Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap() + Duration::seconds(secs)
    }

    #[test]
    fn empty_board() {
        assert!(Leaderboard::new().top(None).is_empty());
        assert!(Leaderboard::new().top(Some(5)).is_empty());
    }

    #[test]
    fn ties_break_on_earlier_update_then_id() {
        let mut lb = Leaderboard::new();
        lb.record("zed", "Zed", 500.0, t(1));
        lb.record("amy", "Amy", 500.0, t(2));
        lb.record("bob", "Bob", 500.0, t(2));
        let ids: Vec<_> = lb.top(None).into_iter().map(|e| e.player_id).collect();
        assert_eq!(ids, ["zed", "amy", "bob"]);
    }

    #[test]
    fn top_n_truncates() {
        let mut lb = Leaderboard::new();
        lb.record("a", "A", 100.0, t(1));
        lb.record("b", "B", 300.0, t(1));
        lb.record("c", "C", 200.0, t(1));
        let top = lb.top(Some(1));
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].player_id, "b");
    }

    #[test]
    fn record_accumulates() {
        let mut lb = Leaderboard::new();
        lb.record("a", "A", 100.0, t(1));
        lb.record("a", "Ann", 50.5, t(3));
        let e = lb.get("a").unwrap();
        assert_eq!(e.total_points, 150.5);
        assert_eq!(e.rounds_played, 2);
        assert_eq!(e.display_name, "Ann");
        assert_eq!(e.last_update, t(3));
    }
}
