use super::table::{Column, Table};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Destination shares (percent) of the held-out Airbnb users. They add up to
/// 100.22 as published; [`class_priors`] renormalizes.
pub const DESTINATION_PERCENT: [(&str, f64); 12] = [
    ("AU", 0.3),
    ("CA", 0.6),
    ("DE", 0.5),
    ("ES", 1.0),
    ("FR", 2.2),
    ("GB", 1.2),
    ("IT", 1.2),
    ("NDF", 59.0),
    ("NL", 0.31),
    ("PT", 0.11),
    ("US", 29.0),
    ("other", 4.8),
];

/// Class labels in [`DESTINATION_PERCENT`] order.
pub fn class_labels() -> Vec<String> {
    DESTINATION_PERCENT.iter().map(|(l, _)| l.to_string()).collect()
}

/// Destination shares scaled to sum to one.
pub fn class_priors() -> Vec<f64> {
    let total: f64 = DESTINATION_PERCENT.iter().map(|(_, p)| p).sum();
    DESTINATION_PERCENT.iter().map(|(_, p)| p / total).collect()
}

/// Probability that `age` is missing, independent of the destination.
pub const AGE_MISSING: f64 = 0.42;

// Arbitrary constants of the synthetic generator. They shape a learnable
// dependence between destination and features and are not estimates of
// anything in the real data. Per destination, in DESTINATION_PERCENT order:
// (gender specified logit, age ≥ 40 logit, log mean session count,
//  booking_request log-odds shift, home-language probability).
const EFFECTS: [(f64, f64, f64, f64, f64); 12] = [
    (0.7, 0.6, 1.9, 1.0, 0.0),  // AU
    (0.7, 0.3, 1.8, 1.0, 0.0),  // CA
    (0.8, 0.5, 1.9, 1.0, 0.35), // DE
    (0.8, 0.0, 1.9, 1.0, 0.35), // ES
    (0.9, 0.8, 2.0, 1.0, 0.35), // FR
    (0.7, 0.7, 1.9, 1.0, 0.0),  // GB
    (0.9, 0.6, 1.9, 1.0, 0.35), // IT
    (-1.2, -0.4, 0.9, -1.5, 0.0), // NDF
    (0.8, 0.4, 1.9, 1.0, 0.35), // NL
    (0.8, 0.4, 1.9, 1.0, 0.35), // PT
    (0.9, 0.0, 2.1, 1.2, 0.0),  // US
    (0.6, 0.2, 1.8, 0.8, 0.0),  // other
];

const HOME_LANGUAGE: [&str; 12] = ["en", "en", "de", "es", "fr", "en", "it", "en", "nl", "pt", "en", "en"];
const OTHER_LANGUAGES: [&str; 8] = ["en", "zh", "fr", "es", "de", "ko", "ru", "it"];
const SIGNUP: [&str; 3] = ["basic", "facebook", "google"];
const DEVICES: [&str; 5] = ["Android Phone", "Mac Desktop", "Windows Desktop", "iPad", "iPhone"];
const BROWSERS: [&str; 4] = ["Chrome", "Firefox", "IE", "Safari"];
const ACTIONS: [&str; 5] = ["booking_request", "click", "message", "search", "view"];
const SESSION_DEVICES: [&str; 3] = ["desktop", "phone", "tablet"];

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Knuth's multiplication method; fine for the small means used here.
fn poisson(mean: f64, rng: &mut Rng) -> usize {
    let limit = (-mean).exp();
    let mut k = 0;
    let mut p = rng.uniform();
    while p > limit {
        k += 1;
        p *= rng.uniform();
    }
    k
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthAirbnb {
    /// `id, gender, age, signup_method, language, first_device_type,
    /// first_browser, country_destination`.
    pub users: Table,
    /// `user_id, action_type, device_type, duration`.
    pub sessions: Table,
    pub truth: Vec<String>,
}

/// Synthetic users and sessions with the Airbnb schema.
///
/// Destinations follow [`class_priors`]; age is missing with probability
/// [`AGE_MISSING`]. Gender specification, age band, session count and the
/// share of booking requests depend on the destination through fixed
/// logistic and log links with arbitrary constants.
pub fn synth_airbnb(n_users: usize, seed: u64) -> Result<SynthAirbnb> {
    if n_users < 100 {
        return Err(Error::param(format!("need at least 100 users, got {n_users}")));
    }
    let priors = class_priors();
    let labels = class_labels();
    let mut rng = Rng::new(seed);
    let mut ids = Vec::with_capacity(n_users);
    let mut gender = Vec::with_capacity(n_users);
    let mut age = Vec::with_capacity(n_users);
    let mut signup = Vec::with_capacity(n_users);
    let mut language = Vec::with_capacity(n_users);
    let mut device = Vec::with_capacity(n_users);
    let mut browser = Vec::with_capacity(n_users);
    let mut truth = Vec::with_capacity(n_users);
    let (mut s_user, mut s_action, mut s_device, mut s_duration) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());

    for i in 0..n_users {
        let c = rng.categorical(&priors);
        let (g_logit, old_logit, log_sessions, book_shift, home) = EFFECTS[c];
        let id = format!("u{i:07}");
        gender.push(if rng.bernoulli(sigmoid(0.2 + g_logit)) {
            let u = rng.uniform();
            Some(if u < 0.47 { "MALE" } else if u < 0.99 { "FEMALE" } else { "OTHER" }.to_string())
        } else {
            None
        });
        let old = rng.bernoulli(sigmoid(-0.5 + old_logit));
        let a = if old { 40.0 + (12.0 * rng.normal()).abs() } else { 20.0 + 20.0 * rng.uniform() };
        age.push(if rng.bernoulli(AGE_MISSING) { None } else { Some(a.round().min(95.0)) });
        signup.push(Some(SIGNUP[rng.below(SIGNUP.len())].to_string()));
        language.push(Some(
            if rng.bernoulli(home) {
                HOME_LANGUAGE[c]
            } else if rng.bernoulli(0.85) {
                "en"
            } else {
                OTHER_LANGUAGES[rng.below(OTHER_LANGUAGES.len())]
            }
            .to_string(),
        ));
        device.push(Some(DEVICES[rng.below(DEVICES.len())].to_string()));
        browser.push(Some(BROWSERS[rng.below(BROWSERS.len())].to_string()));

        let p_book = sigmoid(-2.0 + book_shift);
        for _ in 0..poisson(log_sessions.exp(), &mut rng) {
            s_user.push(Some(id.clone()));
            let action = if rng.bernoulli(p_book) { ACTIONS[0] } else { ACTIONS[1 + rng.below(4)] };
            s_action.push(Some(action.to_string()));
            s_device.push(Some(SESSION_DEVICES[rng.below(3)].to_string()));
            let d = (5.0 + rng.normal()).exp().round();
            s_duration.push(if rng.bernoulli(0.05) { None } else { Some(d) });
        }
        ids.push(Some(id));
        truth.push(labels[c].clone());
    }

    let users = Table::new(vec![
        Column::categorical("id", ids),
        Column::categorical("gender", gender),
        Column::numeric("age", age),
        Column::categorical("signup_method", signup),
        Column::categorical("language", language),
        Column::categorical("first_device_type", device),
        Column::categorical("first_browser", browser),
        Column::categorical("country_destination", truth.iter().cloned().map(Some).collect()),
    ])?;
    let sessions = Table::new(vec![
        Column::categorical("user_id", s_user),
        Column::categorical("action_type", s_action),
        Column::categorical("device_type", s_device),
        Column::numeric("duration", s_duration),
    ])?;
    Ok(SynthAirbnb {
        users,
        sessions,
        truth,
    })
}
