//! Static properties of the object classes used by the bundled layouts.

const SURFACES: &[&str] = &[
    "countertop",
    "diningtable",
    "sidetable",
    "coffeetable",
    "desk",
    "shelf",
    "bed",
    "sofa",
    "armchair",
    "dresser",
    "garbagecan",
    "bathtubbasin",
    "cart",
    "towelholder",
    "toilet",
    "tvstand",
    "stool",
    "floor",
];

const CONTAINERS: &[&str] = &["cabinet", "drawer", "safe"];

const PLAIN_ITEMS: &[&str] = &[
    "spatula",
    "spoon",
    "fork",
    "ladle",
    "book",
    "cd",
    "pen",
    "pencil",
    "keychain",
    "creditcard",
    "cellphone",
    "remotecontrol",
    "laptop",
    "pillow",
    "towel",
    "soapbar",
    "cloth",
    "dishsponge",
    "spraybottle",
    "candle",
    "vase",
    "statue",
    "watch",
    "alarmclock",
    "saltshaker",
    "peppershaker",
    "winebottle",
    "soda",
    "bottle",
    "bag",
    "toy",
    "kcup",
    "newspaper",
    "toiletpaper",
];

/// Static predicates an entity of `class` carries.
pub fn class_statics(class: &str) -> Vec<&'static str> {
    let base = class.strip_suffix("slice").filter(|b| !b.is_empty());
    if let Some(b) = base {
        let mut v = vec!["pickupable"];
        if matches!(b, "bread" | "potato" | "apple" | "tomato") {
            v.push("cookable");
        }
        return v;
    }
    match class {
        "fridge" => vec!["isreceptacle", "openable", "coolsource"],
        "microwave" => vec!["isreceptacle", "openable", "heatsource", "toggleable"],
        "stoveburner" | "toaster" => vec!["isreceptacle", "heatsource", "toggleable"],
        "sinkbasin" => vec!["isreceptacle", "washsource", "toggleable"],
        "coffeemachine" => vec!["isreceptacle", "dispenser", "toggleable"],
        "desklamp" | "floorlamp" | "television" => vec!["toggleable"],
        "human" => vec!["ishuman"],
        "room" => vec![],
        "egg" => vec!["pickupable", "cookable"],
        "apple" | "tomato" | "lettuce" => vec!["pickupable", "sliceable"],
        "bread" | "potato" => vec!["pickupable", "sliceable", "cookable"],
        "knife" | "butterknife" => vec!["pickupable", "cutter"],
        "mug" | "cup" | "pot" => vec!["pickupable", "isreceptacle", "fillable"],
        "bowl" | "pan" | "plate" | "box" => vec!["pickupable", "isreceptacle"],
        c if CONTAINERS.contains(&c) => vec!["isreceptacle", "openable"],
        c if SURFACES.contains(&c) => vec!["isreceptacle"],
        c if PLAIN_ITEMS.contains(&c) => vec!["pickupable"],
        _ => vec!["pickupable"],
    }
}

/// Number of pieces slicing an entity of `class` yields; the original
/// entity stays as one of them.
pub fn slice_pieces(class: &str) -> usize {
    match class {
        "bread" | "apple" | "tomato" | "potato" | "lettuce" => 2,
        _ => 1,
    }
}
