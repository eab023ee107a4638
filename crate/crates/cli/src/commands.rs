//! Subcommand implementations. Each returns `Ok(false)` when a checked
//! property fails and `Err` on bad input.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use flc_spectra::correlation::{autocorr_pointset, autocorr_symbolic};
use flc_spectra::delone::{cluster_frequency, enumerate_k_clusters, BumpFunction, PointSet1D};
use flc_spectra::factors::{apply_block_map, indicator_block_map, verify_factor_equivariance, BlockMap};
use flc_spectra::io;
use flc_spectra::modelset::{
    intensity_at, is_extinct, module_box, silver_mean_chain, weighted_silver_comb, FourierModuleElement,
};
use flc_spectra::spectral::{
    detect_atoms, regularised_diffraction, spectral_distribution, DensityGrid, ExponentialSum, Frequency, UniformGrid,
};
use flc_spectra::subshift::{
    fixed_point_window, letter_frequencies_pf, SubstitutionRule, SymbolicWindow, WordFrequencyTable,
};
use flc_spectra::verify::{self, dyadic_candidates, weyl_controls};
use flc_spectra::Complex64;

use crate::{
    AutocorrArgs, Command, DiffractArgs, FactorArgs, Format, FreqArgs, GenArgs, ModelsetArgs, PointSource, Suite,
    SymbolicSource, VerifyArgs,
};

const DEFAULT_LEN: usize = 1 << 16;
const VERIFY_LEN: usize = 1 << 17;

pub fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Autocorr(a) => autocorr(a),
        Command::Diffract(a) => diffract(a),
        Command::Factor(a) => factor(a),
        Command::Freq(a) => freq(a),
        Command::Verify(a) => verify_suite(a),
        Command::Modelset(a) => modelset(a),
    }
}

struct Loaded {
    rule: Option<SubstitutionRule>,
    window: SymbolicWindow,
    names: Vec<char>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| anyhow!("invalid {what} `{}`", t.trim())))
        .collect()
}

fn parse_pair(s: &str, what: &str) -> Result<(i64, i64)> {
    match parse_list::<i64>(s, what)?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => bail!("{what} needs two comma-separated integers, got `{s}`"),
    }
}

fn parse_weights(s: &str) -> Result<Vec<Complex64>> {
    s.split(',')
        .map(|t| io::parse_complex(t).ok_or_else(|| anyhow!("invalid complex weight `{}`", t.trim())))
        .collect()
}

fn load_symbolic(src: &SymbolicSource, default_rule: Option<&str>, default_len: usize) -> Result<Loaded> {
    let weights = src.weights.as_deref().map(parse_weights).transpose()?;
    if let Some(path) = &src.window {
        let (mut window, names) = io::read_window(&read(path)?)?;
        if let Some(w) = weights {
            window = window.with_weights(w)?;
        }
        let rule = match (&src.rule, &src.rule_file) {
            (Some(name), _) => Some(SubstitutionRule::builtin(name)?),
            (None, Some(p)) => Some(SubstitutionRule::parse(&read(p)?)?),
            (None, None) => None,
        };
        return Ok(Loaded { rule, window, names });
    }
    let (rule, builtin_name) = match (&src.rule, &src.rule_file) {
        (Some(_), Some(_)) => bail!("--rule and --rule-file are mutually exclusive"),
        (Some(name), None) => (SubstitutionRule::builtin(name)?, Some(name.as_str())),
        (None, Some(p)) => (SubstitutionRule::parse(&read(p)?)?, None),
        (None, None) => match default_rule {
            Some(name) => (SubstitutionRule::builtin(name)?, Some(name)),
            None => bail!("one of --rule, --rule-file or --window is required"),
        },
    };
    let seed = match src.seed {
        Some(c) => rule
            .letter_id(c)
            .ok_or_else(|| anyhow!("seed `{c}` is not a letter of the rule"))?,
        None => 0,
    };
    let weights = match weights {
        Some(w) => w,
        None => builtin_name
            .and_then(SubstitutionRule::builtin_weights)
            .unwrap_or_else(|| verify::unit_weights(&rule)),
    };
    if weights.len() != rule.alphabet_size() {
        bail!(
            "{} weights given for an alphabet of {} letters",
            weights.len(),
            rule.alphabet_size()
        );
    }
    let len = src.len.unwrap_or(default_len);
    let window = fixed_point_window(&rule, seed, len.div_ceil(2), weights)?;
    let names = rule.names().to_vec();
    Ok(Loaded {
        rule: Some(rule),
        window,
        names,
    })
}

fn load_points(src: &PointSource) -> Result<Option<PointSet1D>> {
    match (&src.points_file, src.silver_mean) {
        (Some(_), true) => bail!("--silver-mean and --points-file are mutually exclusive"),
        (Some(p), false) => Ok(Some(io::read_points(&read(p)?)?)),
        (None, true) => Ok(Some(silver_mean_chain(src.points)?)),
        (None, false) => Ok(None),
    }
}

fn gen(a: GenArgs) -> Result<bool> {
    let text = match load_points(&a.pts)? {
        Some(ps) => io::write_points(&ps),
        None => {
            let l = load_symbolic(&a.sym, None, DEFAULT_LEN)?;
            io::write_window(&l.window, &l.names)
        }
    };
    emit(a.out.as_deref(), &text)?;
    Ok(true)
}

fn autocorr(a: AutocorrArgs) -> Result<bool> {
    let text = match load_points(&a.pts)? {
        Some(ps) => autocorr_pointset(&ps, a.zmax)?.to_csv(),
        None => {
            let l = load_symbolic(&a.sym, None, DEFAULT_LEN)?;
            autocorr_symbolic(&l.window, a.lags)?.to_csv()
        }
    };
    emit(a.out.as_deref(), &text)?;
    Ok(true)
}

fn candidates(a: &DiffractArgs, symbolic: bool) -> Result<Vec<Frequency>> {
    let mut ks = Vec::new();
    if let Some(s) = &a.k {
        ks.extend(parse_list::<f64>(s, "frequency")?.into_iter().map(Frequency::Real));
    }
    if let Some(j) = a.dyadic {
        ks.extend(dyadic_candidates(j).into_iter().map(Frequency::Real));
    }
    if let Some(s) = &a.module_box {
        let (am, bm) = parse_pair(s, "--module-box")?;
        ks.extend(module_box(am, bm, a.k_max).into_iter().map(Frequency::Module));
    }
    if ks.is_empty() {
        ks = if symbolic {
            dyadic_candidates(6).into_iter().map(Frequency::Real).collect()
        } else {
            module_box(6, 3, a.k_max).into_iter().map(Frequency::Module).collect()
        };
    }
    if a.exclude_zero {
        ks.retain(|k| k.value() != 0.0);
    }
    Ok(ks)
}

fn diffract(a: DiffractArgs) -> Result<bool> {
    let points = load_points(&a.pts)?;
    let loaded = match points {
        Some(_) => None,
        None => Some(load_symbolic(&a.sym, None, DEFAULT_LEN)?),
    };
    let source: &dyn ExponentialSum = match (&points, &loaded) {
        (Some(ps), _) => ps,
        (None, Some(l)) => &l.window,
        (None, None) => unreachable!(),
    };
    let ks = candidates(&a, loaded.is_some())?;
    let schedule = match &a.schedule {
        Some(s) => parse_list::<f64>(s, "schedule entry")?,
        None => {
            let n = source.available_size();
            if loaded.is_some() {
                verify::site_schedule(n as usize)
            } else {
                verify::doubling_schedule(n)
            }
        }
    };
    let mut est = detect_atoms(source, &ks, &schedule, a.rel_tol)?;
    if let Some(m) = a.fejer_lags {
        let l = loaded
            .as_ref()
            .ok_or_else(|| anyhow!("--fejer-lags needs a symbolic source"))?;
        if a.grid_cells == 0 {
            bail!("--grid-cells must be positive");
        }
        let grid = UniformGrid::torus(a.grid_cells);
        let rho = spectral_distribution(&autocorr_symbolic(&l.window, m)?, &grid)?;
        est.grid = Some(DensityGrid {
            min: grid.min,
            max: grid.point(grid.n - 1),
            step: grid.step,
            values: rho.densities(),
        });
    }
    if let Some(eps) = a.eps {
        est = regularised_diffraction(&est, &BumpFunction::tent(eps)?);
    }
    let text = match a.format {
        Format::Json => est.to_json() + "\n",
        Format::Csv => est.atoms_csv(),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(true)
}

fn letter_word(s: &str, names: &[char]) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| {
            names
                .iter()
                .position(|&n| n == c)
                .map(|i| i as u8)
                .ok_or_else(|| anyhow!("`{c}` is not a letter of the alphabet"))
        })
        .collect()
}

fn block_map(spec: &str, l: &Loaded) -> Result<BlockMap> {
    Ok(match spec {
        "identity" => BlockMap::identity(l.window.weights()),
        "xor" => BlockMap::xor(),
        path => io::read_block_map(&read(Path::new(path))?, &l.names)?,
    })
}

fn factor(a: FactorArgs) -> Result<bool> {
    let l = load_symbolic(&a.sym, None, DEFAULT_LEN)?;
    let g = match (&a.g, &a.indicator) {
        (Some(_), Some(_)) => bail!("--g and --indicator are mutually exclusive"),
        (Some(spec), None) => block_map(spec, &l)?,
        (None, Some(w)) => indicator_block_map(&letter_word(w, &l.names)?, a.offset, l.names.len())?,
        (None, None) => bail!("one of --g or --indicator is required"),
    };
    let y = apply_block_map(&l.window, &g)?;
    let names: Vec<char> = (0..g.outputs().len()).map(|i| (b'a' + i as u8) as char).collect();
    emit(a.out.as_deref(), &io::write_window(&y, &names))?;
    if let Some(t) = a.check_shifts {
        if t < 0 {
            bail!("--check-shifts must be non-negative");
        }
        let rep = verify_factor_equivariance(&l.window, &g, -t..=t);
        match rep.first_violation {
            Some(v) => {
                eprintln!("equivariance violated at shift {} index {}", v.shift, v.index);
                return Ok(false);
            }
            None if rep.shifts_tested.is_empty() => {
                eprintln!("equivariance: no shift could be tested");
                return Ok(false);
            }
            None => eprintln!(
                "equivariance holds for {} shifts ({} skipped)",
                rep.shifts_tested.len(),
                rep.skipped.len()
            ),
        }
    }
    Ok(true)
}

fn freq(a: FreqArgs) -> Result<bool> {
    let l = load_symbolic(&a.sym, None, DEFAULT_LEN)?;
    let table = WordFrequencyTable::from_window(&l.window, a.maxlen)?;
    let pf = l.rule.as_ref().map(letter_frequencies_pf).transpose()?;
    let mut rows: Vec<(&Vec<u8>, f64)> = table.entries.iter().map(|(w, &f)| (w, f)).collect();
    rows.sort_by(|x, y| x.0.len().cmp(&y.0.len()).then(x.0.cmp(y.0)));
    let mut s = String::from("word,frequency,error_bound,pf\n");
    for (w, f) in rows {
        let word: String = w.iter().map(|&c| l.names[c as usize]).collect();
        let p = match (&pf, w.as_slice()) {
            (Some(pf), &[c]) => pf[c as usize].to_string(),
            _ => String::new(),
        };
        writeln!(s, "{word},{f},{},{p}", table.error_bound)?;
    }
    emit(a.out.as_deref(), &s)?;
    Ok(true)
}

fn verify_suite(a: VerifyArgs) -> Result<bool> {
    let rep = match a.suite {
        Suite::Specmeas => {
            let l = load_symbolic(&a.sym, Some("thue-morse"), VERIFY_LEN)?;
            let g = block_map(&a.g, &l)?;
            let p = verify::SpecmeasParams {
                max_lag: a.lags,
                candidates: dyadic_candidates(a.dyadic),
                expect_atoms: a.expect_atoms,
                controls: weyl_controls(a.controls),
                ..Default::default()
            };
            verify::specmeas(&l.window, &g, &p)?
        }
        Suite::FreqBack => {
            let l = load_symbolic(&a.sym, Some("fibonacci"), VERIFY_LEN)?;
            let rule = l.rule.ok_or_else(|| anyhow!("freq-back needs --rule or --rule-file"))?;
            let p = verify::FreqBackParams {
                max_len: a.maxlen,
                ..Default::default()
            };
            verify::freq_back(&rule, &l.window, &p)?
        }
        Suite::RegDiffract => verify::reg_diffract(&verify::RegDiffractParams {
            n_points: a.points,
            k_radius: a.k_radius,
            cluster: a.cluster,
            eps: a.eps,
            ..Default::default()
        })?,
        Suite::Inflation => verify::inflation(&verify::InflationParams {
            n_points: a.points,
            ..Default::default()
        })?,
        Suite::Extinction => verify::extinction(&verify::ExtinctionParams {
            n_points: a.points,
            ..Default::default()
        })?,
    };
    println!("{}", rep.render().trim_end());
    Ok(rep.passed)
}

fn modelset(a: ModelsetArgs) -> Result<bool> {
    let sm = silver_mean_chain(a.points)?;
    let mut s = String::new();
    if let Some(k_radius) = a.clusters {
        s.push_str("index,offsets,abs_frequency,rel_frequency\n");
        for (i, c) in enumerate_k_clusters(&sm, k_radius)?.iter().enumerate() {
            let offsets: Vec<String> = match c.exact_offsets() {
                Some(ex) => ex.iter().map(|q| q.to_string()).collect(),
                None => c.offsets().iter().map(|x| x.to_string()).collect(),
            };
            let (abs, rel) = cluster_frequency(&sm, c)?;
            writeln!(s, "{i},{},{abs},{rel}", offsets.join(" "))?;
        }
        emit(a.out.as_deref(), &s)?;
        return Ok(true);
    }
    let comb = match &a.comb_weights {
        Some(w) => match parse_weights(w)?.as_slice() {
            &[short, long] => weighted_silver_comb(&sm, short, long)?,
            _ => bail!("--comb-weights needs two weights"),
        },
        None => sm,
    };
    let mut ks: Vec<FourierModuleElement> =
        a.k.iter()
            .map(|k| parse_pair(k, "--k").map(|(x, y)| FourierModuleElement::new(x, y)))
            .collect::<Result<_>>()?;
    if let Some(b) = &a.module_box {
        let (am, bm) = parse_pair(b, "--module-box")?;
        ks.extend(module_box(am, bm, a.k_max));
    }
    if ks.is_empty() {
        ks = module_box(6, 3, a.k_max);
    }
    let r = a.r.unwrap_or_else(|| comb.available_size());
    s.push_str("a,b,k,k_star,extinct,intensity\n");
    for k in ks {
        let [x, y] = Frequency::Module(k).exact().expect("module element");
        let i = intensity_at(&comb, k, r)?;
        writeln!(s, "{x},{y},{},{},{},{i}", k.value(), k.star_value(), is_extinct(k))?;
    }
    emit(a.out.as_deref(), &s)?;
    Ok(true)
}
