//! Seeded synthetic data with answers known by construction.

use std::collections::BTreeMap;

use geoembed_core::corpus::{CleanPost, CleaningRule, LanguageLabel, RawPost};
use geoembed_core::embedhead::{ImageFeatureStore, TargetSet};
use geoembed_core::gazetteer::Axes;
use geoembed_core::text::{tokenize, TermSet};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;

/// What the cleaning rules should do with a fixture post.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    Discard(CleaningRule),
    Keep(LanguageLabel),
}

#[derive(Debug, Clone)]
pub struct CleaningFixture {
    pub posts: Vec<RawPost>,
    /// Planted outcome of each post, parallel to `posts`.
    pub fates: Vec<Fate>,
    pub other_cities: TermSet,
    pub user_threshold: usize,
    pub min_words: usize,
}

impl CleaningFixture {
    pub fn expected_discards(&self) -> BTreeMap<CleaningRule, usize> {
        let mut out = BTreeMap::new();
        for fate in &self.fates {
            if let Fate::Discard(rule) = fate {
                *out.entry(*rule).or_default() += 1;
            }
        }
        out
    }

    /// Kept post ids per language, in input order.
    pub fn expected_kept(&self) -> BTreeMap<LanguageLabel, Vec<String>> {
        let mut out: BTreeMap<LanguageLabel, Vec<String>> = BTreeMap::new();
        for (post, fate) in self.posts.iter().zip(&self.fates) {
            if let Fate::Keep(lang) = fate {
                out.entry(*lang).or_default().push(post.post_id.clone());
            }
        }
        out
    }
}

const EN_KEPT: &[&str] = &[
    "sunset over the beach with my friends",
    "the best tapas we have had in a long time",
    "walking through the old streets at night",
    "this view from the hill is amazing",
    "coffee and a good book on a rainy day",
    "we love the light in this city",
    "my favourite market for fresh fruit",
    "the cathedral was beautiful today",
    "out with the team after work",
];

const ES_KEPT: &[&str] = &[
    "la puesta de sol desde la playa con mis amigos",
    "las mejores tapas que hemos comido en mucho tiempo",
    "paseando por las calles del barrio por la noche",
    "qué vista tan bonita desde la montaña",
    "un café y un buen libro en un día de lluvia",
    "nos encanta la luz de esta ciudad",
    "mi mercado favorito para comprar fruta fresca",
    "la catedral estaba preciosa hoy",
    "cena con todos los amigos del trabajo",
];

const CA_KEPT: &[&str] = &[
    "la posta de sol des de la platja amb els amics",
    "les millors tapes que hem menjat en molt de temps",
    "passejant pels carrers del barri a la nit",
    "quina vista més bonica des de la muntanya",
    "un cafè i un bon llibre en un dia de pluja",
    "ens encanta la llum d'aquesta ciutat",
    "el meu mercat preferit per comprar fruita",
    "la catedral era molt bonica avui",
];

const OTHER_LANGUAGE: &[&str] = &[
    "wir waren heute im schönen park",
    "ich liebe diese stadt sehr",
    "schöner abend mit freunden am strand",
    "quelle belle journée ensoleillée aujourd'hui",
    "merci beaucoup pour cette soirée",
    "grazie mille ragazzi bellissima serata",
];

const OTHER_CITY: &[&str] = &[
    "back home after a week in madrid",
    "paris in the spring is lovely",
    "flying to london tomorrow morning",
    "weekend trip to new york with family",
    "dinner in roma with old friends",
    "day trip to sitges by train",
];

const SHORT: &[&str] = &["Barcelona sunset", "#sagradafamilia", "hola", "@friend wow", "http://t.co/abc nice", ""];

/// 100 posts: 51 from one over-active user, then 6 short, 5 duplicate,
/// 6 other-city and 6 other-language posts, and 26 kept posts
/// (9 en, 9 es, 8 ca). Some posts break several rules so that only the
/// first rule in order may claim them.
pub fn cleaning_fixture(seed: u64) -> CleaningFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items: Vec<(RawPost, Fate)> = Vec::new();
    let post = |id: String, user: &str, caption: &str, hash: String| RawPost {
        image_feature_id: format!("img_{id}"),
        post_id: id,
        user_id: user.into(),
        caption: caption.into(),
        image_hash: Some(hash),
        lang: None,
    };

    let kept: Vec<(LanguageLabel, &str)> =
        [(LanguageLabel::En, EN_KEPT), (LanguageLabel::Es, ES_KEPT), (LanguageLabel::Ca, CA_KEPT)]
            .iter()
            .flat_map(|&(l, caps)| caps.iter().map(move |c| (l, *c)))
            .collect();
    for (i, &(lang, caption)) in kept.iter().enumerate() {
        let user = format!("user{}", i % 7);
        items.push((post(format!("k{i:02}"), &user, caption, format!("h_k{i:02}")), Fate::Keep(lang)));
    }
    // Duplicates of the first five kept images; the last also names another city.
    for i in 0..5 {
        let caption = if i == 4 { "another evening in madrid with the crew" } else { kept[i + 10].1 };
        items.push((
            post(format!("d{i}"), "user8", caption, format!("h_k{i:02}")),
            Fate::Discard(CleaningRule::Duplicate),
        ));
    }
    for (i, caption) in SHORT.iter().enumerate() {
        // A short post does not claim its image, so k20 stays kept.
        let hash = if i == 0 { "h_k20".to_string() } else { format!("h_s{i}") };
        items.push((post(format!("s{i}"), "user9", caption, hash), Fate::Discard(CleaningRule::ShortCaption)));
    }
    for (i, caption) in OTHER_CITY.iter().enumerate() {
        items.push((
            post(format!("c{i}"), "user10", caption, format!("h_c{i}")),
            Fate::Discard(CleaningRule::OtherCity),
        ));
    }
    for (i, caption) in OTHER_LANGUAGE.iter().enumerate() {
        items.push((
            post(format!("o{i}"), "user11", caption, format!("h_o{i}")),
            Fate::Discard(CleaningRule::OtherLanguage),
        ));
    }
    for i in 0..51 {
        let caption = match i % 5 {
            0 => SHORT[i % SHORT.len()],
            1 => OTHER_CITY[i % OTHER_CITY.len()],
            2 => OTHER_LANGUAGE[i % OTHER_LANGUAGE.len()],
            _ => kept[i % kept.len()].1,
        };
        // Blacklisted posts reuse kept hashes; they never claim an image either.
        let hash = if i % 3 == 0 { format!("h_k{:02}", (i + 7) % kept.len()) } else { format!("h_b{i}") };
        items.push((post(format!("b{i:02}"), "promo_account", caption, hash), Fate::Discard(CleaningRule::Blacklist)));
    }

    items.shuffle(&mut rng);
    // Each duplicate must follow the kept post whose image it repeats.
    for i in 0..5 {
        let dup = items.iter().position(|(p, _)| p.post_id == format!("d{i}")).unwrap();
        let orig = items.iter().position(|(p, _)| p.post_id == format!("k{i:02}")).unwrap();
        if dup < orig {
            items.swap(dup, orig);
        }
    }
    let (posts, fates) = items.into_iter().unzip();
    CleaningFixture {
        posts,
        fates,
        other_cities: crate::records::parse_term_list(crate::records::OTHER_CITIES),
        user_threshold: 50,
        min_words: 3,
    }
}

/// Surface forms for mention counting, with the place each one names.
/// Includes accented, unaccented, upper-case, hashtag and hyphenated
/// spellings.
pub const MENTION_SURFACES: &[(&str, &str)] = &[
    ("El Raval", "el_raval"),
    ("#raval", "el_raval"),
    ("Barri Gòtic", "el_barri_gotic"),
    ("#barrigotic", "el_barri_gotic"),
    ("gothic quarter", "el_barri_gotic"),
    ("La Barceloneta", "la_barceloneta"),
    ("#barceloneta", "la_barceloneta"),
    ("BARCELONETA", "la_barceloneta"),
    ("El Born", "sant_pere_santa_caterina_la_ribera"),
    ("#elborn", "sant_pere_santa_caterina_la_ribera"),
    ("Sagrada Família", "la_sagrada_familia"),
    ("sagrada familia", "la_sagrada_familia"),
    ("#sagradafamilia", "la_sagrada_familia"),
    ("Gràcia", "la_vila_de_gracia"),
    ("gracia", "la_vila_de_gracia"),
    ("Vila de Gràcia", "la_vila_de_gracia"),
    ("Poble-sec", "el_poble_sec"),
    ("#poblesec", "el_poble_sec"),
    ("Poblenou", "el_poblenou"),
    ("#poblenou", "el_poblenou"),
    ("Poble Nou", "el_poblenou"),
    ("Montjuïc", "sants_montjuic"),
    ("montjuich", "sants_montjuic"),
    ("Eixample", "eixample"),
    ("L'Eixample", "eixample"),
    ("Ciutat Vella", "ciutat_vella"),
    ("#ciutatvella", "ciutat_vella"),
    ("Sant Antoni", "sant_antoni"),
    ("#santantoni", "sant_antoni"),
    ("Pedralbes", "pedralbes"),
    ("Tibidabo", "vallvidrera_tibidabo_les_planes"),
    ("Sarrià", "sarria"),
    ("Bunkers del Carmel", "el_carmel"),
    ("Sant Martí", "districte_sant_marti"),
    ("Horta", "horta"),
    ("#diagonalmar", "diagonal_mar_i_el_front_maritim_del_poblenou"),
    ("Vila Olímpica", "la_vila_olimpica_del_poblenou"),
    ("Sant Andreu", "sant_andreu"),
    ("Les Corts", "les_corts"),
    ("Nou Barris", "nou_barris"),
];

/// Words that occur in no alias, so they can never extend a match.
pub const FILLER: &[&str] = &[
    "sunset",
    "coffee",
    "friends",
    "walk",
    "amazing",
    "tapas",
    "photo",
    "summer",
    "today",
    "streets",
    "view",
    "light",
    "market",
    "music",
    "weekend",
    "morning",
    "dinner",
    "love",
    "wow",
    "beautiful",
];

#[derive(Debug, Clone)]
pub struct MentionFixture {
    pub posts: Vec<CleanPost>,
    /// Planted occurrence count per canonical place.
    pub occurrences: BTreeMap<String, u64>,
    /// Planted number of posts mentioning each place at least once.
    pub per_post: BTreeMap<String, u64>,
}

/// Captions with zero to three mentions each, always separated by filler,
/// so every mention is counted exactly once.
pub fn mention_fixture(n: usize, language: LanguageLabel, seed: u64) -> MentionFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut occurrences: BTreeMap<String, u64> = BTreeMap::new();
    let mut per_post: BTreeMap<String, u64> = BTreeMap::new();
    let mut posts = Vec::with_capacity(n);
    for i in 0..n {
        let mut words: Vec<&str> = vec![FILLER.choose(&mut rng).unwrap()];
        let mut seen = Vec::new();
        for _ in 0..rng.random_range(0..=3) {
            let &(surface, place) = MENTION_SURFACES.choose(&mut rng).unwrap();
            words.push(surface);
            words.push(FILLER.choose(&mut rng).unwrap());
            *occurrences.entry(place.into()).or_default() += 1;
            if !seen.contains(&place) {
                seen.push(place);
                *per_post.entry(place.into()).or_default() += 1;
            }
        }
        let caption = words.join(" ");
        let raw = RawPost {
            post_id: format!("m{i:04}"),
            user_id: format!("u{}", i % 13),
            image_feature_id: format!("mimg{i:04}"),
            image_hash: None,
            lang: Some(language.code().into()),
            caption,
        };
        posts.push(CleanPost { tokens: tokenize(&raw.caption), post: raw, language });
    }
    MentionFixture { posts, occurrences, per_post }
}

/// Images whose neighborhood targets come from a hidden linear map of
/// their features plus Gaussian noise.
#[derive(Debug, Clone)]
pub struct PlantedTask {
    pub ids: Vec<String>,
    pub axes: Axes,
    pub store: ImageFeatureStore,
    pub targets: TargetSet,
}

impl PlantedTask {
    /// Axis with the largest target component for `id`.
    pub fn dominant(&self, id: &str) -> Option<usize> {
        let t = self.targets.get(id)?;
        (0..t.len()).max_by(|&a, &b| t[a].total_cmp(&t[b]))
    }
}

/// Features are standard normal; the hidden map has entries
/// `N(0, 1/features)` so pre-noise targets have unit-scale components.
pub fn planted_task(n: usize, features: usize, places: usize, noise: f64, seed: u64) -> Result<PlantedTask> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = Normal::new(0.0, 1.0).expect("unit normal");
    let jitter = Normal::new(0.0, noise).map_err(|e| crate::Error::Config(format!("noise: {e}")))?;
    let scale = (features as f64).sqrt();
    let hidden: Vec<f64> = (0..places * features).map(|_| gauss.sample(&mut rng) / scale).collect();

    let axes = Axes::new((0..places).map(|j| format!("place_{j:02}")).collect())?;
    let mut store = ImageFeatureStore::new(features);
    let mut targets = TargetSet::new(places);
    let ids: Vec<String> = (0..n).map(|i| format!("p{i:05}")).collect();
    for id in &ids {
        let x: Vec<f64> = (0..features).map(|_| gauss.sample(&mut rng)).collect();
        let mut t: Vec<f64> = hidden
            .chunks(features)
            .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + jitter.sample(&mut rng))
            .collect();
        geoembed_core::linalg::normalize_in_place(&mut t)?;
        store.insert(id.clone(), &x.iter().map(|&v| v as f32).collect::<Vec<_>>())?;
        targets.insert(id.clone(), &t)?;
    }
    Ok(PlantedTask { ids, axes, store, targets })
}

/// Sentences drawn entirely from one of two disjoint vocabularies,
/// `a0..` and `b0..`.
pub fn two_cluster_corpus(words_per_cluster: usize, sentences: usize, length: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..sentences)
        .map(|_| {
            let c = if rng.random::<bool>() { 'a' } else { 'b' };
            (0..length).map(|_| format!("{c}{}", rng.random_range(0..words_per_cluster))).collect()
        })
        .collect()
}

struct Language {
    label: LanguageLabel,
    templates: &'static [&'static str],
    /// Topic words per fixture place, in [`PIPELINE_PLACES`] order.
    topics: [[&'static str; 3]; 6],
}

/// Places mentioned by the pipeline fixture, as (surface, canonical).
pub const PIPELINE_PLACES: [(&str, &str); 6] = [
    ("#barceloneta", "la_barceloneta"),
    ("el Raval", "el_raval"),
    ("Sagrada Família", "la_sagrada_familia"),
    ("Poble-sec", "el_poble_sec"),
    ("#poblenou", "el_poblenou"),
    ("Gràcia", "la_vila_de_gracia"),
];

const LANGUAGES: [Language; 3] = [
    Language {
        label: LanguageLabel::En,
        templates: &[
            "the {a} at {p} was amazing",
            "love the {a} and the {b} in {p}",
            "we had a great {a} in {p} today",
            "my favourite {a} near {p} with the {b}",
        ],
        topics: [
            ["beach", "sea", "sand"],
            ["bar", "street", "mural"],
            ["church", "gaudi", "tower"],
            ["tapas", "theatre", "vermouth"],
            ["design", "loft", "bike"],
            ["square", "festival", "terrace"],
        ],
    },
    Language {
        label: LanguageLabel::Es,
        templates: &[
            "el {a} en {p} es muy bonito",
            "me encanta el {a} y la {b} de {p}",
            "hoy un {a} muy bueno en {p}",
            "mi {a} favorito cerca de {p} con la {b}",
        ],
        topics: [
            ["playa", "mar", "arena"],
            ["bar", "calle", "mural"],
            ["iglesia", "gaudi", "torre"],
            ["tapas", "teatro", "vermut"],
            ["diseño", "loft", "bici"],
            ["plaza", "fiesta", "terraza"],
        ],
    },
    Language {
        label: LanguageLabel::Ca,
        templates: &[
            "el {a} a {p} és preciós",
            "m'encanta el {a} i la {b} de {p}",
            "avui un {a} molt bo a {p}",
            "el meu {a} preferit a prop de {p} amb la {b}",
        ],
        topics: [
            ["platja", "mar", "sorra"],
            ["bar", "carrer", "mural"],
            ["església", "gaudi", "torre"],
            ["tapes", "teatre", "vermut"],
            ["disseny", "loft", "bici"],
            ["plaça", "festa", "terrassa"],
        ],
    },
];

/// Raw posts plus toy image features for an end-to-end run.
#[derive(Debug, Clone)]
pub struct PipelineFixture {
    pub posts: Vec<RawPost>,
    pub features: ImageFeatureStore,
}

pub const PIPELINE_FEATURE_DIM: usize = 16;

/// 300 posts, 100 per language, each naming one of six places with
/// place-specific topic words. Images of the same place share a feature
/// prototype. Ten posts break a cleaning rule.
pub fn pipeline_fixture(seed: u64) -> Result<PipelineFixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = Normal::new(0.0, 1.0).expect("unit normal");
    let prototypes: Vec<Vec<f64>> = (0..PIPELINE_PLACES.len())
        .map(|_| (0..PIPELINE_FEATURE_DIM).map(|_| gauss.sample(&mut rng)).collect())
        .collect();
    let mut posts = Vec::new();
    let mut features = ImageFeatureStore::new(PIPELINE_FEATURE_DIM);
    for lang in &LANGUAGES {
        for i in 0..100 {
            let place = rng.random_range(0..PIPELINE_PLACES.len());
            let topics = lang.topics[place];
            let caption = lang
                .templates
                .choose(&mut rng)
                .unwrap()
                .replace("{p}", PIPELINE_PLACES[place].0)
                .replace("{a}", topics.choose(&mut rng).unwrap())
                .replace("{b}", topics.choose(&mut rng).unwrap());
            let id = format!("{}{i:03}", lang.label.code());
            let feature_id = format!("img_{id}");
            let row: Vec<f32> = prototypes[place].iter().map(|&p| (p + 0.5 * gauss.sample(&mut rng)) as f32).collect();
            features.insert(feature_id.clone(), &row)?;
            posts.push(RawPost {
                post_id: id.clone(),
                user_id: format!("user{}", rng.random_range(0..30)),
                caption,
                image_feature_id: feature_id,
                image_hash: Some(format!("hash_{id}")),
                lang: None,
            });
        }
    }
    // Planted violations: short captions, repeated images, other cities.
    for (i, j) in [(0, 7), (1, 120), (2, 250), (3, 33)] {
        posts[j].caption = ["hola", "#gracia", "wow", "Barcelona!"][i].into();
    }
    for j in [15, 140, 260] {
        posts[j].image_hash = posts[j - 1].image_hash.clone();
    }
    for (i, j) in [(0, 50), (1, 170), (2, 280)] {
        posts[j].caption.push_str([" before flying to madrid", " y luego a paris", " i després a london"][i]);
    }
    posts.shuffle(&mut rng);
    Ok(PipelineFixture { posts, features })
}
