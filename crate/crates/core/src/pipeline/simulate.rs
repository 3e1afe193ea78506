use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::cohort::{Column, MergedCohort, Provenance, Sex, LIPID_PREFIXES};
use crate::morphometry::{canonical_feature_names, FeatureId, Metric, VesselClass};

/// A planted partial correlation (given age and sex) between a fundus feature and a lipid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedEffect {
    pub fundus: String,
    pub lipid: String,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedEffectSpec {
    pub n: usize,
    pub lipid_names: Vec<String>,
    pub planted: Vec<PlantedEffect>,
    /// Partial correlation of a fundus feature with age given sex.
    pub fundus_age_r: BTreeMap<String, f64>,
    /// Shift of a fundus feature for women, in feature SD units.
    pub fundus_sex_shift: BTreeMap<String, f64>,
    /// Age slope shared by every lipid, in lipid SD units per age SD.
    pub lipid_age_effect: f64,
    /// Shift of every lipid for women, in lipid SD units.
    pub lipid_sex_shift: f64,
    pub age_mean: f64,
    pub age_sd: f64,
    pub female_fraction: f64,
    /// Probability that any single feature cell is missing.
    pub missing_rate: f64,
}

impl Default for PlantedEffectSpec {
    fn default() -> Self {
        let lipid_names = default_lipid_names();
        let plant = |fundus: &str, lipids: &[&str], r: f64| -> Vec<PlantedEffect> {
            lipids
                .iter()
                .enumerate()
                .map(|(i, l)| PlantedEffect {
                    fundus: fundus.into(),
                    lipid: (*l).into(),
                    r: if i % 3 == 2 { -r } else { r },
                })
                .collect()
        };
        let mut planted = vec![PlantedEffect {
            fundus: "artery_average_width".into(),
            lipid: "cer_d18:0/c16:0".into(),
            r: 0.15,
        }];
        let pool: Vec<&str> = lipid_names
            .iter()
            .map(String::as_str)
            .filter(|n| *n != "cer_d18:0/c16:0")
            .collect();
        planted.extend(plant("artery_average_width", &pool[0..14], 0.09));
        planted.extend(plant("vein_average_width", &pool[14..23], 0.08));
        planted.extend(plant("artery_vessel_density", &pool[23..30], 0.07));
        planted.extend(plant("fractal_dimension", &pool[30..36], 0.07));
        Self {
            n: 7068,
            lipid_names,
            planted,
            fundus_age_r: [
                ("artery_average_width", -0.22),
                ("vein_average_width", -0.24),
                ("average_width", -0.18),
                ("fractal_dimension", -0.12),
                ("artery_fractal_dimension", -0.11),
                ("vein_fractal_dimension", -0.10),
                ("vessel_density", -0.13),
                ("artery_vessel_density", -0.11),
                ("artery_distance_tortuosity", 0.11),
                ("vein_distance_tortuosity", 0.10),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
            fundus_sex_shift: [("artery_average_width", 0.39), ("vein_average_width", 0.33)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            lipid_age_effect: 0.15,
            lipid_sex_shift: 0.2,
            age_mean: 52.64,
            age_sd: 7.87,
            female_fraction: 0.513,
            missing_rate: 0.0,
        }
    }
}

/// 187 lipid species: a fixed set of named species followed by generated
/// names cycling through the subclass prefixes.
pub fn default_lipid_names() -> Vec<String> {
    const NAMED: [&str; 20] = [
        "22:6_cholesteryl_ester",
        "cer_d18:0/c16:0",
        "cer_d18:1/c24:0",
        "coenzyme_q10",
        "dag_32:1",
        "dag_34:1",
        "dag_36:2",
        "fa_22:0_behenic_acid",
        "glccer_d18:1/c16:0",
        "laccer_d18:1/c24:1",
        "lysopc_18:2",
        "lysopc_20:0",
        "pc_32:1",
        "pc_34:1",
        "pe_36:4",
        "pg_34:0",
        "pi_38:5",
        "ps_38:3",
        "sm_d18:1/c20:0",
        "tag_50:0",
    ];
    let mut names: Vec<String> = NAMED.iter().map(|s| s.to_string()).collect();
    let mut seen: HashSet<String> = names.iter().cloned().collect();
    let mut i = 0usize;
    while names.len() < 187 {
        let prefix = LIPID_PREFIXES[i % LIPID_PREFIXES.len()];
        let round = i / LIPID_PREFIXES.len();
        let name = format!("{prefix}{}:{}", 30 + 2 * (round % 12), round / 12);
        if seen.insert(name.clone()) {
            names.push(name);
        }
        i += 1;
    }
    names
}

/// Population mean and SD used for a simulated fundus feature.
fn fundus_scale(id: FeatureId) -> (f64, f64) {
    use Metric::*;
    use VesselClass::*;
    match (id.class, id.metric) {
        (Artery, AverageWidth) => (18305.19, 1287.08),
        (Vein, AverageWidth) => (19413.99, 1259.65),
        (Combined, AverageWidth) => (18860.0, 1180.0),
        (Artery, VesselDensity) => (0.0391, 0.0045),
        (Vein, VesselDensity) => (0.0499, 0.0043),
        (Combined, VesselDensity) => (0.0860, 0.0070),
        (_, FractalDimension) => (1.45, 0.03),
        (_, DistanceTortuosity) => (1.08, 0.01),
        (_, SquaredCurvatureTortuosity) => (1.2e-4, 2.0e-5),
        (Artery, TortuosityDensity) => (0.6971, 0.0334),
        (Vein, TortuosityDensity) => (0.7060, 0.0249),
        (Combined, TortuosityDensity) => (0.7010, 0.0290),
    }
}

fn lipid_scale(i: usize) -> (f64, f64) {
    let u = ((i * 37) % 101) as f64 / 100.0;
    let v = ((i * 53) % 97) as f64 / 96.0;
    (0.05 + 1.0 * u, 0.05 + 0.4 * v)
}

impl PlantedEffectSpec {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let invalid = |m: String| Err(PipelineError::InvalidSpec(m));
        if self.n == 0 {
            return invalid("n must be positive".into());
        }
        if self.lipid_names.is_empty() {
            return invalid("no lipid names".into());
        }
        let mut seen = HashSet::new();
        if let Some(d) = self.lipid_names.iter().find(|n| !seen.insert(n.as_str())) {
            return invalid(format!("duplicate lipid `{d}`"));
        }
        if !(self.age_sd > 0.0)
            || !(0.0..=1.0).contains(&self.female_fraction)
            || !(0.0..1.0).contains(&self.missing_rate)
        {
            return invalid("age_sd, female_fraction or missing_rate out of range".into());
        }
        let fundus = canonical_feature_names();
        let mut per_lipid: HashMap<&str, f64> = HashMap::new();
        let mut pairs = HashSet::new();
        for p in &self.planted {
            if !fundus.contains(&p.fundus) {
                return invalid(format!("unknown fundus feature `{}`", p.fundus));
            }
            if !self.lipid_names.contains(&p.lipid) {
                return invalid(format!("unknown lipid `{}`", p.lipid));
            }
            if !pairs.insert((p.fundus.as_str(), p.lipid.as_str())) {
                return invalid(format!("pair {} / {} planted twice", p.fundus, p.lipid));
            }
            *per_lipid.entry(p.lipid.as_str()).or_default() += p.r * p.r;
        }
        if let Some((l, s)) = per_lipid.iter().find(|(_, &s)| s >= 1.0) {
            return invalid(format!("planted r² for `{l}` sums to {s}, must be below 1"));
        }
        for (name, &r) in &self.fundus_age_r {
            if !fundus.contains(name) {
                return invalid(format!("unknown fundus feature `{name}`"));
            }
            if r.abs() >= 1.0 {
                return invalid(format!("age correlation {r} for `{name}` must be inside (-1, 1)"));
            }
        }
        if let Some(name) = self.fundus_sex_shift.keys().find(|n| !fundus.contains(n)) {
            return invalid(format!("unknown fundus feature `{name}`"));
        }
        Ok(())
    }
}

/// Draws a cohort with the specified structure. Within each participant the
/// fundus latents are independent standard normals; a lipid latent is
/// Σ ρ·e_f + √(1 − Σρ²)·u, so ρ is the partial correlation given age and sex.
pub fn simulate_cohort(spec: &PlantedEffectSpec, seed: u64) -> Result<MergedCohort, PipelineError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n;
    let fundus_names = canonical_feature_names();
    let lipid_index: HashMap<&str, usize> = spec
        .lipid_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut loadings: Vec<Vec<(usize, f64)>> = vec![Vec::new(); spec.lipid_names.len()];
    for p in &spec.planted {
        let f = fundus_names.iter().position(|n| *n == p.fundus).expect("validated");
        loadings[lipid_index[p.lipid.as_str()]].push((f, p.r));
    }

    let width = (n as f64).log10().floor() as usize + 1;
    let ids: Vec<String> = (0..n).map(|i| format!("SIM{:0width$}", i + 1)).collect();
    let mut age = Vec::with_capacity(n);
    let mut sex = Vec::with_capacity(n);
    let mut fundus: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(n); fundus_names.len()];
    let mut lipids: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(n); spec.lipid_names.len()];
    let mut latent = vec![0.0; fundus_names.len()];
    let female_centre = spec.female_fraction;

    for _ in 0..n {
        let z_age: f64 = rng.sample(StandardNormal);
        let a = (spec.age_mean + spec.age_sd * z_age).clamp(18.0, 100.0);
        let s = if rng.random_bool(spec.female_fraction) {
            Sex::Female
        } else {
            Sex::Male
        };
        let a_std = (a - spec.age_mean) / spec.age_sd;
        let s_c = s.code() - female_centre;
        age.push(Some((a * 100.0).round() / 100.0));
        sex.push(Some(s));

        for (f, name) in fundus_names.iter().enumerate() {
            latent[f] = rng.sample(StandardNormal);
            let rho = spec.fundus_age_r.get(name).copied().unwrap_or(0.0);
            let shift = spec.fundus_sex_shift.get(name).copied().unwrap_or(0.0);
            let z = rho * a_std + (1.0 - rho * rho).sqrt() * latent[f] + shift * s_c;
            let (mean, sd) = fundus_scale(FeatureId::from_index(f));
            fundus[f].push(Some(mean + sd * z));
        }
        for (l, load) in loadings.iter().enumerate() {
            let u: f64 = rng.sample(StandardNormal);
            let explained: f64 = load.iter().map(|&(_, r)| r * r).sum();
            let e = load.iter().map(|&(f, r)| r * latent[f]).sum::<f64>() + (1.0 - explained).sqrt() * u;
            let z = spec.lipid_age_effect * a_std + spec.lipid_sex_shift * s_c + e;
            let (mean, sd) = lipid_scale(l);
            lipids[l].push(Some(mean + sd * z));
        }
    }

    if spec.missing_rate > 0.0 {
        for col in fundus.iter_mut().chain(lipids.iter_mut()) {
            for v in col.iter_mut() {
                if rng.random_bool(spec.missing_rate) {
                    *v = None;
                }
            }
        }
    }

    Ok(MergedCohort {
        participant_ids: ids,
        age,
        sex,
        fundus: fundus_names
            .into_iter()
            .zip(fundus)
            .map(|(name, values)| Column { name, values })
            .collect(),
        lipids: spec
            .lipid_names
            .iter()
            .cloned()
            .zip(lipids)
            .map(|(name, values)| Column { name, values })
            .collect(),
        provenance: Provenance {
            n_fundus: n,
            n_lipid: n,
            n_joined: n,
            ..Default::default()
        },
        rejected: Vec::new(),
    })
}
