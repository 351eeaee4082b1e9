use symphonic::zoo::{catalog, lookup, verify_entry, Tag};

#[test]
fn every_certified_tag_rechecks() {
    let mut failures = Vec::new();
    for entry in catalog() {
        for check in verify_entry(&entry, 100, 1e-7).unwrap() {
            if !check.holds {
                failures.push(format!(
                    "{}: {:?} residual {:e} {}",
                    entry.id, check.tag, check.residual, check.detail
                ));
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn dilation_and_stereographic_tags() {
    let d = lookup("dilation:2.5").unwrap();
    assert!(d.has_tag(|t| *t == Tag::TotallyGeodesic));
    assert!(d.has_tag(|t| *t == Tag::HorizontallyConformal { lambda: Some(2.5) }));
    let s = lookup("stereographic").unwrap();
    assert!(s.has_tag(|t| *t == Tag::Conformal { lambda: None }));
    assert!(s.has_tag(|t| *t == Tag::NotTotallyGeodesic));
    let r = lookup("radial_2p_harmonic:2").unwrap();
    assert!(r.has_tag(|t| *t == Tag::PSymphonic { p: 2.0 }));
    assert_eq!(r.map().unwrap().source().name(), "punctured_r3");
}

#[test]
fn unknown_ids_are_rejected() {
    assert!(lookup("nope").is_err());
    assert!(lookup("dilation:abc").is_err());
    assert!(lookup("coord:3:2").is_err());
}
