use glyphforge::cli::run;

#[test]
fn config_path_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("env.toml");
    std::fs::write(&cfg, "[block]\nmin_side = 16\n").unwrap();
    std::env::set_var("GLYPHFORGE_CONFIG", &cfg);
    let mut out = Vec::new();
    let code = run(["glyphforge", "block", "--quad", "0,0,5,0,5,5,0,5", "--image-size", "40x40"], &mut out);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["side_effective"], 16);

    std::fs::write(&cfg, "[block]\nmin_sid = 16\n").unwrap();
    let code = run(["glyphforge", "block", "--quad", "0,0,5,0,5,5,0,5", "--image-size", "40x40"], &mut Vec::new());
    assert_eq!(code, 2);
}
