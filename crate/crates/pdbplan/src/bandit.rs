//! UCB1 multi-armed bandit over time-weighted pulls.
//!
//! Pull counts are measured in seconds spent on an arm rather than discrete
//! pulls, clamped below at one millisecond so a free action still registers.

const MIN_PULL_SECONDS: f64 = 0.001;

#[derive(Debug, Clone)]
struct Arm<T> {
    action: T,
    reward: f64,
    seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Ucb1<T> {
    arms: Vec<Arm<T>>,
    total_seconds: f64,
}

impl<T: Clone + PartialEq> Ucb1<T> {
    pub fn new(actions: impl IntoIterator<Item = T>) -> Self {
        Ucb1 {
            arms: actions
                .into_iter()
                .map(|action| Arm {
                    action,
                    reward: 0.0,
                    seconds: 0.0,
                })
                .collect(),
            total_seconds: 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn actions(&self) -> impl Iterator<Item = &T> {
        self.arms.iter().map(|a| &a.action)
    }

    /// UCB1 score of one arm given the current totals; `None` for an arm
    /// that was never pulled (such arms take precedence in `select`).
    pub fn score(&self, index: usize) -> Option<f64> {
        let arm = &self.arms[index];
        if arm.seconds <= 0.0 {
            return None;
        }
        let mean = arm.reward / arm.seconds;
        // ln(n) can go negative when under a second has elapsed in total;
        // no exploration bonus in that case
        let bonus = (2.0 * self.total_seconds.ln() / arm.seconds).max(0.0);
        Some(mean + bonus.sqrt())
    }

    /// Picks the arm with the highest UCB1 score; any unpulled arm is chosen
    /// first. Ties go to the lowest index.
    pub fn select(&self) -> Option<&T> {
        if self.arms.is_empty() {
            return None;
        }
        if let Some(arm) = self.arms.iter().find(|a| a.seconds <= 0.0) {
            return Some(&arm.action);
        }
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for i in 0..self.arms.len() {
            let score = self.score(i).expect("all arms pulled");
            if score > best_score {
                best_score = score;
                best = i;
            }
        }
        Some(&self.arms[best].action)
    }

    /// Records one pull: `seconds` spent (clamped to at least 1ms) and the
    /// reward earned.
    pub fn update(&mut self, action: &T, seconds: f64, reward: f64) {
        let seconds = seconds.max(MIN_PULL_SECONDS);
        let arm = self
            .arms
            .iter_mut()
            .find(|a| a.action == *action)
            .expect("unknown bandit arm");
        arm.seconds += seconds;
        arm.reward += reward;
        self.total_seconds += seconds;
    }

    /// Drops an arm (e.g. an exhausted generator); the time total shrinks
    /// accordingly so remaining exploration terms stay consistent.
    pub fn remove_arm(&mut self, action: &T) {
        self.arms.retain(|a| a.action != *action);
        self.total_seconds = self.arms.iter().map(|a| a.seconds).sum();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unpulled_arms_are_selected_first_in_order() {
        let mut b = Ucb1::new(["a", "b", "c"]);
        assert_eq!(b.select(), Some(&"a"));
        b.update(&"a", 1.0, 0.0);
        assert_eq!(b.select(), Some(&"b"));
        b.update(&"b", 1.0, 0.0);
        assert_eq!(b.select(), Some(&"c"));
    }

    #[test]
    fn scores_match_direct_formula() {
        let mut b = Ucb1::new([0usize, 1]);
        b.update(&0, 2.0, 1.0);
        b.update(&1, 3.0, 0.5);
        let n: f64 = 5.0;
        for (i, (r, s)) in [(1.0f64, 2.0f64), (0.5, 3.0)].iter().enumerate() {
            let expected = r / s + (2.0 * n.ln() / s).sqrt();
            assert!((b.score(i).unwrap() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn worked_example_score() {
        // arm 0: reward 1 over 2s; arm 1: reward 0 over 8s; n = 10s
        let mut b = Ucb1::new([0usize, 1]);
        b.update(&0, 2.0, 1.0);
        b.update(&1, 8.0, 0.0);
        let expected0 = 0.5 + (2.0 * 10.0f64.ln() / 2.0).sqrt();
        let expected1 = (2.0 * 10.0f64.ln() / 8.0).sqrt();
        assert!((expected0 - 2.017_43).abs() < 1e-5);
        assert!((expected1 - 0.758_72).abs() < 1e-5);
        assert!((b.score(0).unwrap() - expected0).abs() < 1e-9);
        assert!((b.score(1).unwrap() - expected1).abs() < 1e-9);
        assert_eq!(b.select(), Some(&0));
    }

    #[test]
    fn short_pulls_clamp_to_a_millisecond() {
        let mut b = Ucb1::new([0usize]);
        b.update(&0, 0.0, 1.0);
        assert!((b.total_seconds - 0.001).abs() < 1e-12);
        // mean = 1 / 0.001 = 1000
        assert!(b.score(0).unwrap() > 999.0);
    }

    #[test]
    fn rewarded_arm_wins_with_equal_time() {
        let mut b = Ucb1::new(["x", "y"]);
        b.update(&"x", 1.0, 1.0);
        b.update(&"y", 1.0, 0.0);
        assert_eq!(b.select(), Some(&"x"));
    }

    #[test]
    fn starved_arm_eventually_explored() {
        let mut b = Ucb1::new(["good", "idle"]);
        b.update(&"idle", 1.0, 0.0);
        let mut saw_idle = false;
        for _ in 0..200 {
            let pick = *b.select().unwrap();
            if pick == "idle" {
                saw_idle = true;
                break;
            }
            b.update(&"good", 1.0, 1.0);
        }
        assert!(saw_idle, "exploration term never lifted the idle arm");
    }

    #[test]
    fn remove_arm_rebuilds_total() {
        let mut b = Ucb1::new([0usize, 1, 2]);
        b.update(&0, 2.0, 1.0);
        b.update(&1, 3.0, 0.0);
        b.update(&2, 4.0, 0.5);
        b.remove_arm(&1);
        assert_eq!(b.len(), 2);
        assert!((b.total_seconds - 6.0).abs() < 1e-12);
        let expected = 1.0 / 2.0 + (2.0 * 6.0f64.ln() / 2.0).sqrt();
        assert!((b.score(0).unwrap() - expected).abs() < 1e-9);
    }
}
