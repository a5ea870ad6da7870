//! End-to-end checks of the CLI: golden files for the CSV schemas, rerun
//! determinism, manifest completeness, summary cross-checks and process
//! exit codes.

use light_cli::commands::{self, Ctx, OutputFormat, Scale};
use light_cli::config::ConfigFile;
use std::path::{Path, PathBuf};
use std::process::Command;

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("light-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn ctx(dir: &Path) -> Ctx {
    Ctx {
        out_dir: dir.to_path_buf(),
        base_seed: 0,
        scale: Scale::Desk,
        jobs: 1,
        format: OutputFormat::Csv,
    }
}

#[test]
fn population_csv_is_golden() {
    let dir = temp_dir("pop-golden");
    let cfg = ConfigFile::parse(
        "[population]\nmodel = verhulst\nr = 1\ne = 0\nk = 1\nt_start = 0\nn_start = 0.5\n\
         t_min = 0\nt_max = 1\npoints = 2\n",
    )
    .unwrap();
    commands::population::run(&ctx(&dir), &cfg).unwrap();
    let text = std::fs::read_to_string(dir.join("population.csv")).unwrap();
    let expected = "t,N,model,r,E,K,T,N_T\n\
        0.0000000000000000e0,5.0000000000000000e-1,verhulst,1.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,5.0000000000000000e-1\n\
        1.0000000000000000e0,7.3105857863000490e-1,verhulst,1.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,5.0000000000000000e-1\n";
    assert_eq!(text, expected);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn eval_light_csv_is_golden() {
    let dir = temp_dir("eval-golden");
    let cfg = ConfigFile::parse(
        "[eval-light]\nmodel = verhulst\nconfiguration = default\nt_min = 0\nt_max = 2\npoints = 2\n",
    )
    .unwrap();
    commands::eval_light::run(&ctx(&dir), &cfg).unwrap();
    let text = std::fs::read_to_string(dir.join("eval_light.csv")).unwrap();
    let expected = "t,value,derivative\n\
        0.0000000000000000e0,5.0000000000000000e-1,2.5000000000000000e-1\n\
        2.0000000000000000e0,8.8079707797788231e-1,1.0499358540350651e-1\n";
    assert_eq!(text, expected);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn population_defaults_are_the_harvest_onset_curve() {
    // defaults: verhulst, r=0.9, E=0.1, T=4, N_T=0.2 over [0, 12]
    let dir = temp_dir("pop-defaults");
    commands::population::run(&ctx(&dir), &ConfigFile::default()).unwrap();
    let text = std::fs::read_to_string(dir.join("population.csv")).unwrap();
    let onset_row = text.lines().nth(81).unwrap(); // t = 4 on the 241-point grid
    // 0.2 renders as 2.0000000000000001e-1 at 17 significant digits
    assert!(
        onset_row.starts_with("4.0000000000000000e0,2.0000000000000001e-1,verhulst"),
        "{onset_row}"
    );
    std::fs::remove_dir_all(dir).ok();
}

fn tiny_sweep_config() -> ConfigFile {
    ConfigFile::parse(
        "[sweep]\nsamples = 60\ndims = 2\ncluster_std = 0.3\nepochs = 3\nbatch_size = 16\n\
         seeds = 1,2\nseries = sigmoid-sgd, light-v-er-sgd\n",
    )
    .unwrap()
}

fn dir_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
        .collect();
    names.sort();
    names
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let dir_a = temp_dir("sweep-a");
    let dir_b = temp_dir("sweep-b");
    let cfg = tiny_sweep_config();
    let ma = commands::sweep::run(&ctx(&dir_a), &cfg).unwrap();
    let mb = commands::sweep::run(&ctx(&dir_b), &cfg).unwrap();
    assert!(ma.failures.is_empty());
    assert_eq!(ma.artifacts, mb.artifacts);
    for rel in &ma.artifacts {
        let a = std::fs::read(dir_a.join(rel)).unwrap();
        let b = std::fs::read(dir_b.join(rel)).unwrap();
        assert_eq!(a, b, "artifact {rel} differs between reruns");
    }
    std::fs::remove_dir_all(dir_a).ok();
    std::fs::remove_dir_all(dir_b).ok();
}

#[test]
fn sweep_parallel_matches_serial() {
    let dir_a = temp_dir("sweep-serial");
    let dir_b = temp_dir("sweep-par");
    let cfg = ConfigFile::parse(
        "[sweep]\nsamples = 60\ndims = 2\ncluster_std = 0.3, 0.6\nepochs = 2\nbatch_size = 16\n\
         seeds = 1,2\nseries = sigmoid-sgd\n",
    )
    .unwrap();
    let ma = commands::sweep::run(&ctx(&dir_a), &cfg).unwrap();
    let mut par = ctx(&dir_b);
    par.jobs = 4;
    let mb = commands::sweep::run(&par, &cfg).unwrap();
    assert_eq!(ma.artifacts, mb.artifacts);
    for rel in &ma.artifacts {
        assert_eq!(
            std::fs::read(dir_a.join(rel)).unwrap(),
            std::fs::read(dir_b.join(rel)).unwrap(),
            "artifact {rel} differs with --jobs 4"
        );
    }
    std::fs::remove_dir_all(dir_a).ok();
    std::fs::remove_dir_all(dir_b).ok();
}

#[test]
fn summary_matches_recomputation_from_curves() {
    let dir = temp_dir("sweep-summary");
    let cfg = tiny_sweep_config();
    commands::sweep::run(&ctx(&dir), &cfg).unwrap();
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    let mut checked = 0;
    for line in summary.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let (series, n_seeds, mean_final): (&str, usize, f64) =
            (cols[5], cols[6].parse().unwrap(), cols[7].parse().unwrap());
        let mut finals = Vec::new();
        for seed in [1u64, 2] {
            let rel = format!("curve_L1_d100_m60_n2_std0.3_{series}_seed{seed}.csv");
            let text = std::fs::read_to_string(dir.join(&rel)).unwrap();
            let last = text.lines().last().unwrap();
            let acc: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
            finals.push(acc);
        }
        assert_eq!(n_seeds, finals.len());
        let recomputed = finals.iter().sum::<f64>() / finals.len() as f64;
        assert!((recomputed - mean_final).abs() < 1e-12, "{series}");
        checked += 1;
    }
    assert_eq!(checked, 2);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn manifest_lists_every_artifact() {
    let dir = temp_dir("sweep-manifest");
    let mut c = ctx(&dir);
    c.format = OutputFormat::CsvSvg;
    let manifest = commands::sweep::run(&c, &tiny_sweep_config()).unwrap();
    for rel in &manifest.artifacts {
        assert!(dir.join(rel).exists(), "listed artifact {rel} missing");
    }
    let on_disk = dir_files(&dir);
    for name in on_disk {
        if name == "manifest.jsonl" {
            continue;
        }
        assert!(manifest.artifacts.contains(&name), "unlisted file {name}");
    }
    // the svg exists in csv+svg mode
    assert!(manifest.artifacts.iter().any(|a| a.ends_with(".svg")));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn hyperopt_emits_rates_table() {
    let dir = temp_dir("hyperopt");
    let cfg = ConfigFile::parse(
        "[hyperopt]\nmodels = v\nconfigurations = r\nsamples = 60\nruns = 2\nlayers = 0\nwidth = 0\n",
    )
    .unwrap();
    commands::hyperopt::run(&ctx(&dir), &cfg).unwrap();
    let text = std::fs::read_to_string(dir.join("hyperopt.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "model,configuration,mean_r,sd_r,mean_E,sd_E,H,E_star,H_star"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("verhulst,r,"));
    // -r- searches have E = 0 everywhere: H = 0, E* = mean_r / 2
    let cols: Vec<&str> = row.split(',').collect();
    let mean_r: f64 = cols[2].parse().unwrap();
    let e_star: f64 = cols[7].parse().unwrap();
    assert_eq!(cols[4].parse::<f64>().unwrap(), 0.0);
    assert_eq!(cols[6].parse::<f64>().unwrap(), 0.0);
    assert!((e_star - mean_r / 2.0).abs() < 1e-12);
    // rerun determinism, including across worker counts
    let dir2 = temp_dir("hyperopt-2");
    let mut par = ctx(&dir2);
    par.jobs = 2;
    commands::hyperopt::run(&par, &cfg).unwrap();
    assert_eq!(
        std::fs::read(dir.join("hyperopt.csv")).unwrap(),
        std::fs::read(dir2.join("hyperopt.csv")).unwrap()
    );
    std::fs::remove_dir_all(dir).ok();
    std::fs::remove_dir_all(dir2).ok();
}

#[test]
fn empty_series_list_is_a_config_error() {
    let dir = temp_dir("empty-series");
    let cfg = ConfigFile::parse("[sweep]\nseries =\n").unwrap();
    match commands::sweep::run(&ctx(&dir), &cfg) {
        Err(commands::CliError::Config(m)) => assert!(m.contains("series")),
        other => panic!("expected a config error, got {other:?}"),
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn convergence_emits_trace_and_fit() {
    let dir = temp_dir("convergence");
    let cfg = ConfigFile::parse(
        "[convergence]\nmodel = verhulst\nconfiguration = er\nr = 2\nsamples = 40\n\
         cluster_std = 0.15\niterations = 50\n",
    )
    .unwrap();
    commands::convergence::run(&ctx(&dir), &cfg).unwrap();
    let text = std::fs::read_to_string(dir.join("convergence.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "iteration,margin,d_minus_margin,g_of_t,ln_t"
    );
    assert_eq!(text.lines().count(), 51);
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("fit.json")).unwrap()).unwrap();
    assert!(fit["max_margin"].as_f64().unwrap() > 0.0);
    assert_eq!(fit["iterations"].as_u64().unwrap(), 50);
    // rerun determinism
    let dir2 = temp_dir("convergence-2");
    commands::convergence::run(&ctx(&dir2), &cfg).unwrap();
    assert_eq!(
        std::fs::read(dir.join("convergence.csv")).unwrap(),
        std::fs::read(dir2.join("convergence.csv")).unwrap()
    );
    std::fs::remove_dir_all(dir).ok();
    std::fs::remove_dir_all(dir2).ok();
}

fn write_fake_pima(path: &Path) {
    let mut text = String::new();
    for i in 0..768 {
        let feats: Vec<String> = (0..8)
            .map(|j| format!("{}", ((i * 13 + j * 7) % 50) as f64 * 0.1))
            .collect();
        text.push_str(&format!("{},{}\n", feats.join(","), i % 2));
    }
    std::fs::write(path, text).unwrap();
}

fn write_fake_mnist(path: &Path, rows: usize) {
    let mut text = String::new();
    for i in 0..rows {
        let pixels: Vec<String> = (0..784)
            .map(|j| format!("{}", (i * 31 + j) % 256))
            .collect();
        text.push_str(&format!("{},{}\n", pixels.join(","), i % 10));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn uci_trains_on_local_files() {
    let dir = temp_dir("uci");
    let pima = dir.join("pima.csv");
    let mnist = dir.join("mnist.csv");
    write_fake_pima(&pima);
    write_fake_mnist(&mnist, 60);
    let cfg = ConfigFile::parse(&format!(
        "[uci]\npima_indians = {}\nmnist = {}\nmnist_train_rows = 50\nimage_train = 20\n\
         image_test = 5\nepochs = 2\nbatch_size = 32\nseeds = 1\nseries = sigmoid-sgd\n",
        pima.display(),
        mnist.display()
    ))
    .unwrap();
    let manifest = commands::uci::run(&ctx(&dir), &cfg).unwrap();
    assert!(manifest.failures.is_empty(), "{:?}", manifest.failures);
    let summary = std::fs::read_to_string(dir.join("uci_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3); // header + two datasets
    assert!(dir.join("uci_pima_indians_sigmoid-sgd_seed1.csv").exists());
    assert!(dir.join("uci_mnist_sigmoid-sgd_seed1.csv").exists());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn uci_cache_option_round_trips() {
    let dir = temp_dir("uci-cache");
    let pima = dir.join("pima.csv");
    write_fake_pima(&pima);
    let cfg = ConfigFile::parse(&format!(
        "[uci]\npima_indians = {}\nepochs = 1\nbatch_size = 64\nseeds = 1\n\
         series = sigmoid-sgd\ncache_datasets = true\n",
        pima.display()
    ))
    .unwrap();
    let manifest = commands::uci::run(&ctx(&dir), &cfg).unwrap();
    assert!(manifest.artifacts.iter().any(|a| a == "uci_pima_indians.cache"));
    let cached = light_core::data::read_cache(dir.join("uci_pima_indians.cache")).unwrap();
    assert_eq!(cached.len(), 768);
    assert_eq!(cached.dim(), 8);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn uci_parallel_matches_serial() {
    let dir_a = temp_dir("uci-serial");
    let dir_b = temp_dir("uci-par");
    let pima_a = dir_a.join("pima.csv");
    let pima_b = dir_b.join("pima.csv");
    write_fake_pima(&pima_a);
    write_fake_pima(&pima_b);
    let cfg_for = |p: &Path| {
        ConfigFile::parse(&format!(
            "[uci]\npima_indians = {}\nepochs = 2\nbatch_size = 64\nseeds = 1,2\n\
             series = sigmoid-sgd, light-v-er-sgd\n",
            p.display()
        ))
        .unwrap()
    };
    let ma = commands::uci::run(&ctx(&dir_a), &cfg_for(&pima_a)).unwrap();
    let mut par = ctx(&dir_b);
    par.jobs = 3;
    let mb = commands::uci::run(&par, &cfg_for(&pima_b)).unwrap();
    assert_eq!(ma.artifacts, mb.artifacts);
    for rel in &ma.artifacts {
        assert_eq!(
            std::fs::read(dir_a.join(rel)).unwrap(),
            std::fs::read(dir_b.join(rel)).unwrap(),
            "{rel} differs with --jobs 3"
        );
    }
    std::fs::remove_dir_all(dir_a).ok();
    std::fs::remove_dir_all(dir_b).ok();
}

#[test]
fn uci_rejects_wrong_shape() {
    let dir = temp_dir("uci-shape");
    let pima = dir.join("pima.csv");
    // 10 rows only: fails the published-shape validation
    let mut text = String::new();
    for i in 0..10 {
        let feats: Vec<String> = (0..8).map(|j| format!("{}", i + j)).collect();
        text.push_str(&format!("{},{}\n", feats.join(","), i % 2));
    }
    std::fs::write(&pima, text).unwrap();
    let cfg = ConfigFile::parse(&format!("[uci]\npima_indians = {}\n", pima.display())).unwrap();
    assert!(commands::uci::run(&ctx(&dir), &cfg).is_err());
    std::fs::remove_dir_all(dir).ok();
}

// ---- process-level checks of the installed binary ----

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_light"))
}

#[test]
fn exit_code_zero_on_smoke_run() {
    let dir = temp_dir("bin-smoke");
    let status = bin()
        .args(["simulate-population", "--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.join("population.csv").exists());
    assert!(dir.join("manifest.jsonl").exists());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn exit_code_one_on_config_error() {
    let dir = temp_dir("bin-badcfg");
    let cfg = dir.join("bad.conf");
    std::fs::write(&cfg, "[population]\npoints = not-a-number\n").unwrap();
    let status = bin()
        .args(["simulate-population", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn exit_code_one_when_uci_has_no_datasets() {
    let dir = temp_dir("bin-nouci");
    let status = bin().args(["uci", "--out"]).arg(&dir).status().unwrap();
    assert_eq!(status.code(), Some(1));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn exit_code_two_on_partial_failure() {
    let dir = temp_dir("bin-partial");
    let cfg = dir.join("sweep.conf");
    // dims = 1 cannot be generated; every cell fails but the run completes
    std::fs::write(
        &cfg,
        "[sweep]\nsamples = 40\ndims = 1\ncluster_std = 0.3\nepochs = 1\nseeds = 1\nseries = sigmoid-sgd\n",
    )
    .unwrap();
    let status = bin()
        .args(["sweep-synthetic", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn exit_code_three_on_numeric_failure() {
    let dir = temp_dir("bin-numeric");
    let cfg = dir.join("conv.conf");
    // widely overlapping clusters: the folded dataset is not separable
    std::fs::write(
        &cfg,
        "[convergence]\nconfiguration = default\nsamples = 200\ncluster_std = 3.0\niterations = 10\n",
    )
    .unwrap();
    let status = bin()
        .args(["convergence", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = temp_dir("bin-envdir");
    let status = bin()
        .arg("simulate-population")
        .env(light_cli::OUT_DIR_ENV, &dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.join("population.csv").exists());
    std::fs::remove_dir_all(dir).ok();
}
