use std::fs;
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::io::Write;

use nativeternary::ModelManifest;

fn ntrn(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ntrn"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn ntrn");
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str], stdin: &[u8]) -> Vec<u8> {
    let out = ntrn(args, stdin);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn encode_example_is_24_bytes() {
    let file = ok(&["encode", "--delimiter", "11", "--mapping", "balanced"], b"D-1 D0 D+1 B2");
    assert_eq!(file.len(), 24);
    assert_eq!(&file[..6], b"NTRN\x01\xc0");
    assert_eq!(&file[22..], &[0x1b, 0xc0]);

    let report = String::from_utf8(ok(&["inspect"], &file)).unwrap();
    assert_eq!(field(&report, "delimiter"), "11");
    assert_eq!(field(&report, "mapping"), "balanced");
    assert_eq!(field(&report, "pair_count"), "5");
    assert_eq!(field(&report, "boundary_census"), "level2=1");
}

#[test]
fn encode_decode_pipe_is_identity() {
    let text = "D+1 B3\nD-1 D-1 D0 B1\nD+1\n";
    for delimiter in ["00", "01", "10", "11"] {
        let file = ok(&["encode", "--delimiter", delimiter], text.as_bytes());
        assert_eq!(String::from_utf8(ok(&["decode"], &file)).unwrap(), text);
    }
    let unsigned = "D2 D0 B2\n";
    let file = ok(&["encode", "--mapping", "unsigned"], unsigned.as_bytes());
    assert_eq!(String::from_utf8(ok(&["decode"], &file)).unwrap(), unsigned);

    let dual = "A01 B A1\n";
    let file = ok(&["encode", "--variant", "dual"], dual.as_bytes());
    assert_eq!(String::from_utf8(ok(&["decode"], &file)).unwrap(), dual);
    let report = String::from_utf8(ok(&["inspect"], &file)).unwrap();
    assert_eq!(field(&report, "symbols_a"), "2");
}

#[test]
fn files_via_in_and_out() {
    let dir = tempfile::tempdir().unwrap();
    let events = path(dir.path(), "events.txt");
    let container = path(dir.path(), "c.ntrn");
    fs::write(&events, "D0 B1 D+1\n").unwrap();
    ok(&["encode", "--in", &events, "--out", &container], b"");
    let back = ok(&["decode", "--in", &container], b"");
    assert_eq!(back, b"D0 B1\nD+1\n");
}

#[test]
fn pack_unpack_2b4t_shape() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = ModelManifest::bitnet_2b4t(5);
    let manifest_path = path(dir.path(), "manifest.json");
    let weights_path = path(dir.path(), "weights.bin");
    fs::write(&manifest_path, manifest.to_json()).unwrap();
    let weights: Vec<u8> = (0..manifest.weight_count()).map(|i| [0xff, 0x00, 0x01][(i * 7 % 3) as usize]).collect();
    fs::write(&weights_path, &weights).unwrap();

    let model = ok(&["pack", "--manifest", &manifest_path, "--weights", &weights_path], b"");
    let report = String::from_utf8(ok(&["inspect"], &model)).unwrap();
    assert_eq!(field(&report, "model_tensors"), "170");
    assert_eq!(field(&report, "model_boundary_bits"), "728");
    assert_eq!(field(&report, "model_boundary_bytes"), "91");
    assert_eq!(field(&report, "boundary_bits"), "728");
    assert_eq!(field(&report, "boundary_census"), "level2=146 level3=24");

    let out_manifest = path(dir.path(), "out.json");
    let unpacked = ok(&["unpack", "--manifest", &out_manifest], &model);
    assert_eq!(unpacked, weights);
    assert_eq!(ModelManifest::from_json(&fs::read(&out_manifest).unwrap()).unwrap(), manifest);
}

#[test]
fn transcode_round_trip() {
    let data: Vec<u8> = (0..1000u32).map(|i| (i.wrapping_mul(2654435761) >> 13) as u8).collect();
    let file = ok(&["transcode"], &data);
    let report = String::from_utf8(ok(&["inspect"], &file)).unwrap();
    assert_eq!(field(&report, "transcoded"), "true");
    assert_eq!(field(&report, "original_byte_length"), "1000");
    assert_eq!(ok(&["transcode", "--reverse"], &file), data);
}

#[test]
fn corrupt_is_deterministic_and_reports() {
    let text = "D0 ".repeat(200) + "B2 D+1";
    let file = ok(&["encode"], text.as_bytes());
    let a = ntrn(&["corrupt", "--flips", "12", "--seed", "7"], &file);
    let b = ntrn(&["corrupt", "--flips", "12", "--seed", "7"], &file);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    assert_ne!(a.stdout, file);
    let report = String::from_utf8(a.stderr).unwrap();
    let classes: u64 = ["false_boundaries", "lost_or_split_boundaries", "value_flips"]
        .iter()
        .map(|k| field(&report, k).parse::<u64>().unwrap())
        .sum();
    assert_eq!(classes, field(&report, "corrupted_pairs").parse::<u64>().unwrap());
    assert_eq!(field(&report, "corrupted_pairs"), "12");
}

#[test]
fn bench_and_analyze_run() {
    let bench = String::from_utf8(ok(&["bench", "--scale", "10000", "--iterations", "1"], b"")).unwrap();
    assert!(bench.contains("encode MB/s"));
    let analyze = String::from_utf8(ok(&["analyze"], b"")).unwrap();
    assert!(analyze.contains("= 728 bits = 91 bytes"));
    assert!(analyze.contains("0.4475 bits/char"));
    assert_eq!(ok(&["analyze"], b""), analyze.as_bytes());
}

#[test]
fn exit_codes() {
    let code = |args: &[&str], stdin: &[u8]| ntrn(args, stdin).status.code().unwrap();

    assert_eq!(code(&["frobnicate"], b""), 2);
    assert_eq!(code(&["encode", "--delimiter", "12"], b""), 2);
    assert_eq!(code(&["encode", "--variant", "dual", "--mapping", "unsigned"], b""), 2);

    let mut gguf = ok(&["encode"], b"D0");
    gguf[..4].copy_from_slice(b"GGUF");
    assert_eq!(code(&["decode"], &gguf), 3);

    assert_eq!(code(&["encode"], b"D2"), 4);
    assert_eq!(code(&["encode"], b"B1 B1"), 4);

    // a model whose manifest disagrees with the boundary census
    let dir = tempfile::tempdir().unwrap();
    let m = path(dir.path(), "m.json");
    let w = path(dir.path(), "w.bin");
    fs::write(&m, ModelManifest::uniform(1, 2, 2).to_json()).unwrap();
    fs::write(&w, [0u8, 1, 0xff, 0]).unwrap();
    let model = ok(&["pack", "--manifest", &m, "--weights", &w], b"");
    let lying = ModelManifest::uniform(1, 2, 2);
    let mut lying_json = lying.to_json();
    let pos = lying_json.windows(10).position(|x| x == b"\"elements\"").unwrap();
    lying_json[pos + 11] = b'1';
    let mut tampered = model[..22].to_vec();
    tampered.extend_from_slice(&(lying_json.len() as u32).to_le_bytes());
    tampered.extend_from_slice(&lying_json);
    tampered.extend_from_slice(&model[22 + 4 + lying.to_json().len()..]);
    assert_eq!(code(&["unpack"], &tampered), 5);

    fs::write(&w, [0u8, 2, 0, 0]).unwrap();
    assert_eq!(code(&["pack", "--manifest", &m, "--weights", &w], b""), 4);
}
