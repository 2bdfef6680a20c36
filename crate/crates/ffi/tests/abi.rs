use std::ffi::{CStr, CString};
use std::ptr;

use phonostat_ffi::*;

fn last_error() -> String {
    let p = phonostat_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn from_parts(mean: &[f64], cov: &[f64]) -> *mut PhonostatGaussian {
    let mut g = ptr::null_mut();
    let s = unsafe { phonostat_gaussian_from_parts(mean.as_ptr(), cov.as_ptr(), mean.len(), 100, &mut g) };
    assert_eq!(s, PhonostatStatus::Ok);
    g
}

#[test]
fn symmetric_kld_of_unit_shift() {
    let p = from_parts(&[0.0], &[1.0]);
    let q = from_parts(&[1.0], &[1.0]);
    let (mut rs, mut sr, mut sym) = (0.0, 0.0, 0.0);
    let s = unsafe { phonostat_symmetric_kld(p, q, &mut rs, &mut sr, &mut sym) };
    assert_eq!(s, PhonostatStatus::Ok);
    assert!((rs - 0.5).abs() < 1e-12 && (sr - 0.5).abs() < 1e-12 && (sym - 0.5).abs() < 1e-12);
    let mut d = 0.0;
    assert_eq!(unsafe { phonostat_kld(p, q, &mut d) }, PhonostatStatus::Ok);
    assert!((d - 0.5).abs() < 1e-12);
    // only d_sym requested
    let mut only = 0.0;
    let s = unsafe { phonostat_symmetric_kld(p, q, ptr::null_mut(), ptr::null_mut(), &mut only) };
    assert_eq!((s, only), (PhonostatStatus::Ok, sym));
    unsafe {
        phonostat_gaussian_free(p);
        phonostat_gaussian_free(q);
        phonostat_gaussian_free(ptr::null_mut());
    }
}

#[test]
fn fit_picks_diagonal_for_few_samples() {
    let samples = [0.0, 1.0, 2.0, 0.5, 1.0, -1.0];
    let mut g = ptr::null_mut();
    let s = unsafe {
        phonostat_gaussian_fit(samples.as_ptr(), 2, 3, PhonostatCovariancePolicy::Auto, 0.05, 1e-8, &mut g)
    };
    assert_eq!(s, PhonostatStatus::Ok);
    unsafe {
        assert_eq!(phonostat_gaussian_dim(g), 3);
        assert_eq!(phonostat_gaussian_is_diagonal(g), 1);
        phonostat_gaussian_free(g);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut d = 0.0;
    let s = unsafe { phonostat_kld(ptr::null(), ptr::null(), &mut d) };
    assert_eq!(s, PhonostatStatus::NullPointer);
    assert!(last_error().contains("null"));

    let p = from_parts(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
    let q = from_parts(&[0.0], &[1.0]);
    let s = unsafe { phonostat_kld(p, q, &mut d) };
    assert_eq!(s, PhonostatStatus::InvalidArgument);
    assert!(last_error().contains("dimension"));

    // a success clears the message
    assert_eq!(unsafe { phonostat_kld(p, p, &mut d) }, PhonostatStatus::Ok);
    assert!(phonostat_last_error_message().is_null());

    let singular = from_parts(&[0.0, 0.0], &[1.0, 1.0, 1.0, 1.0]);
    let s = unsafe { phonostat_kld(p, singular, &mut d) };
    assert_eq!(s, PhonostatStatus::Numeric);
    unsafe {
        phonostat_gaussian_free(p);
        phonostat_gaussian_free(q);
        phonostat_gaussian_free(singular);
    }
}

#[test]
fn pearson_matches_hand_computation() {
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let ys = [2.0, 1.0, 4.0, 3.0, 5.0];
    let (mut r, mut p) = (0.0, 0.0);
    let s = unsafe { phonostat_pearson(xs.as_ptr(), ys.as_ptr(), 5, &mut r, &mut p) };
    assert_eq!(s, PhonostatStatus::Ok);
    // sxy = 8, sxx = syy = 10
    assert!((r - 0.8).abs() < 1e-12);
    assert!(p > 0.0 && p < 1.0);
    let flat = [3.0; 5];
    let s = unsafe { phonostat_pearson(xs.as_ptr(), flat.as_ptr(), 5, &mut r, &mut p) };
    assert_eq!(s, PhonostatStatus::InvalidArgument);
}

#[test]
fn pfe1_round_trip() {
    let data: Vec<f64> = (0..12).map(|i| i as f64 * 0.25 - 1.0).collect();
    let mut needed = 0usize;
    let s = unsafe { phonostat_pfe1_encode(data.as_ptr(), 4, 3, 0.02, 0.025, 0.01, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(s, PhonostatStatus::Ok);
    // magic + 3 u32 + 3 f64 + 12 f32
    assert_eq!(needed, 4 + 12 + 24 + 48);

    let mut small = vec![0u8; needed - 1];
    let mut written = 0usize;
    let s = unsafe {
        phonostat_pfe1_encode(data.as_ptr(), 4, 3, 0.02, 0.025, 0.01, small.as_mut_ptr(), small.len(), &mut written)
    };
    assert_eq!((s, written), (PhonostatStatus::BufferTooSmall, needed));

    let mut buf = vec![0u8; needed];
    let s = unsafe {
        phonostat_pfe1_encode(data.as_ptr(), 4, 3, 0.02, 0.025, 0.01, buf.as_mut_ptr(), buf.len(), &mut written)
    };
    assert_eq!(s, PhonostatStatus::Ok);
    assert_eq!(&buf[..4], b"PFE1");

    let mut frames = ptr::null_mut();
    assert_eq!(unsafe { phonostat_pfe1_decode(buf.as_ptr(), buf.len(), &mut frames) }, PhonostatStatus::Ok);
    let (mut n, mut dim, mut hop, mut win, mut start) = (0, 0, 0.0, 0.0, 0.0);
    let s = unsafe { phonostat_frames_shape(frames, &mut n, &mut dim, &mut hop, &mut win, &mut start) };
    assert_eq!(s, PhonostatStatus::Ok);
    assert_eq!((n, dim, hop, win, start), (4, 3, 0.02, 0.025, 0.01));
    let values = unsafe { std::slice::from_raw_parts(phonostat_frames_data(frames), n * dim) };
    // quarter steps are exact in f32
    assert_eq!(values, &data[..]);
    unsafe { phonostat_frames_free(frames) };

    let mut frames = ptr::null_mut();
    let s = unsafe { phonostat_pfe1_decode(buf.as_ptr(), 20, &mut frames) };
    assert_eq!(s, PhonostatStatus::Parse);
    assert!(frames.is_null());
}

const GRID: &str = r#"File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 0.4
tiers? <exists>
size = 1
item []:
    item [1]:
        class = "IntervalTier"
        name = "phones"
        xmin = 0
        xmax = 0.4
        intervals: size = 4
        intervals [1]:
            xmin = 0
            xmax = 0.1
            text = "sil"
        intervals [2]:
            xmin = 0.1
            xmax = 0.2
            text = "HH"
        intervals [3]:
            xmin = 0.2
            xmax = 0.3
            text = "AY1"
        intervals [4]:
            xmin = 0.3
            xmax = 0.4
            text = ""
"#;

#[test]
fn textgrid_phone_count() {
    let text = CString::new(GRID).unwrap();
    let mut tg = ptr::null_mut();
    assert_eq!(unsafe { phonostat_textgrid_parse(text.as_ptr(), &mut tg) }, PhonostatStatus::Ok);
    let mut count = 0;
    let tier = CString::new("phones").unwrap();
    assert_eq!(unsafe { phonostat_textgrid_phone_count(tg, tier.as_ptr(), &mut count) }, PhonostatStatus::Ok);
    assert_eq!(count, 2);
    let missing = CString::new("words").unwrap();
    let s = unsafe { phonostat_textgrid_phone_count(tg, missing.as_ptr(), &mut count) };
    assert_eq!(s, PhonostatStatus::InvalidArgument);
    assert!(last_error().contains("words"));
    unsafe { phonostat_textgrid_free(tg) };

    let bad = CString::new("File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n0\n1\n<exists>\n").unwrap();
    let mut tg = ptr::null_mut();
    assert_eq!(unsafe { phonostat_textgrid_parse(bad.as_ptr(), &mut tg) }, PhonostatStatus::Parse);
}

#[test]
fn phoneme_lookup() {
    let mut idx = 0u32;
    let label = CString::new("AA1").unwrap();
    assert_eq!(unsafe { phonostat_phoneme_index(label.as_ptr(), &mut idx) }, PhonostatStatus::Ok);
    assert_eq!(idx, 0);
    let name = unsafe { CStr::from_ptr(phonostat_phoneme_name(idx)) };
    assert_eq!(name.to_str().unwrap(), "AA");
    assert_eq!(phonostat_phoneme_is_vowel(idx), 1);
    let zh = CString::new("ZH").unwrap();
    assert_eq!(unsafe { phonostat_phoneme_index(zh.as_ptr(), &mut idx) }, PhonostatStatus::Ok);
    assert_eq!((idx, phonostat_phoneme_is_vowel(idx)), (38, 0));
    assert!(phonostat_phoneme_name(39).is_null());
    assert_eq!(phonostat_phoneme_is_vowel(39), -1);
    let bad = CString::new("XX1").unwrap();
    assert_eq!(unsafe { phonostat_phoneme_index(bad.as_ptr(), &mut idx) }, PhonostatStatus::InvalidArgument);
}

#[test]
fn header_declares_every_export() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/phonostat.h")).unwrap();
    let source = std::fs::read_to_string(format!("{dir}/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct PhonostatGaussian PhonostatGaussian;"));
    assert!(header.contains("PHONOSTAT_STATUS_OK = 0"));
}

#[test]
fn c_program_links_against_static_library() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libphonostat_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let out = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("phonostat_smoke");
    let status = std::process::Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let run = std::process::Command::new(&out).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).ends_with("0.500\n"));
}
