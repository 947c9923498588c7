use crate::dna::complement_reverse;
use crate::error::{Error, Result};
use crate::library::{BlockLayout, MotifId, MotifLibrary};
use crate::synthsim::{Orientation, PoreModel};

/// Expected level sequence of one token variant.
#[derive(Clone, Debug, PartialEq)]
pub struct Template {
    /// Motif for slot variants; `None` for spacers.
    pub motif: Option<MotifId>,
    pub levels: Vec<f64>,
}

/// One step of the oligo grammar as seen in read order.
#[derive(Clone, Debug, PartialEq)]
pub enum GrammarToken {
    /// A spacer, by its position index on the forward strand.
    Spacer { position: usize, template: Template },
    /// A slot, by its forward-strand index, with one variant per library motif.
    Slot {
        slot: usize,
        variants: Vec<Template>,
    },
}

impl GrammarToken {
    pub fn variants(&self) -> &[Template] {
        match self {
            GrammarToken::Spacer { template, .. } => std::slice::from_ref(template),
            GrammarToken::Slot { variants, .. } => variants,
        }
    }

    /// Nominal number of levels, used for the duration band.
    pub fn nominal_len(&self) -> usize {
        self.variants()[0].levels.len()
    }
}

/// Level templates of every token for one read orientation.
///
/// A spacer contributes the k-mers lying wholly inside it. A slot contributes
/// every k-mer touching its motif, so it includes `κ − 1` bases of context from
/// each neighbouring spacer; the concatenated templates of a molecule equal
/// its full level sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct TemplateBank {
    pub orientation: Orientation,
    pub tokens: Vec<GrammarToken>,
}

impl TemplateBank {
    pub fn new(
        library: &MotifLibrary,
        layout: &BlockLayout,
        pore: &PoreModel,
        orientation: Orientation,
    ) -> Result<Self> {
        layout.check_library(library)?;
        pore.validate()?;
        let k = pore.kmer_length;
        if k < 1 || k - 1 > library.spacer_length || library.spacer_length < k {
            return Err(Error::InvalidParameter(format!(
                "k-mer length {k} does not fit spacers of length {}",
                library.spacer_length
            )));
        }
        let n_slots = layout.total_slots();
        let reverse = orientation == Orientation::Reverse;
        let orient = |s: &[u8]| {
            if reverse {
                complement_reverse(s)
            } else {
                s.to_vec()
            }
        };
        // read-order spacer `i` is forward spacer `fwd_spacer(i)`
        let fwd_spacer = |i: usize| if reverse { n_slots - i } else { i };
        let fwd_slot = |i: usize| if reverse { n_slots - 1 - i } else { i };
        let spacer_seq = |i: usize| orient(library.spacer(fwd_spacer(i)));

        let mut tokens = Vec::with_capacity(2 * n_slots + 1);
        for i in 0..=n_slots {
            tokens.push(GrammarToken::Spacer {
                position: fwd_spacer(i),
                template: Template {
                    motif: None,
                    levels: pore.levels(&spacer_seq(i)),
                },
            });
            if i == n_slots {
                break;
            }
            let left = spacer_seq(i);
            let right = spacer_seq(i + 1);
            let variants = (0..library.n_motifs() as MotifId)
                .map(|m| {
                    let mut seq = left[left.len() + 1 - k..].to_vec();
                    seq.extend(orient(library.motif(m)));
                    seq.extend(&right[..k - 1]);
                    Template {
                        motif: Some(m),
                        levels: pore.levels(&seq),
                    }
                })
                .collect();
            tokens.push(GrammarToken::Slot {
                slot: fwd_slot(i),
                variants,
            });
        }
        Ok(Self {
            orientation,
            tokens,
        })
    }

    /// Total levels along any path through the grammar.
    pub fn path_len(&self) -> usize {
        self.tokens.iter().map(GrammarToken::nominal_len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{generate_library, LibraryParams};
    use crate::synthsim::{generate_pore_model, molecule_sequence};

    #[test]
    fn concatenated_templates_equal_molecule_levels() {
        let lib = generate_library(&LibraryParams::default(), 2).unwrap();
        let layout = BlockLayout::default();
        let pore = generate_pore_model(6, 2).unwrap();
        let chosen: Vec<MotifId> = vec![1, 0, 2, 3, 7, 6, 5, 4, 4];
        let seq = molecule_sequence(&chosen, &lib, &layout);
        for orientation in [Orientation::Forward, Orientation::Reverse] {
            let bank = TemplateBank::new(&lib, &layout, &pore, orientation).unwrap();
            assert_eq!(bank.tokens.len(), 19);
            assert_eq!(bank.path_len(), 620);
            let mut levels: Vec<f64> = Vec::new();
            for tok in &bank.tokens {
                match tok {
                    GrammarToken::Spacer { template, .. } => {
                        assert_eq!(template.levels.len(), 35);
                        levels.extend(&template.levels);
                    }
                    GrammarToken::Slot { slot, variants } => {
                        assert!(variants.iter().all(|v| v.levels.len() == 30));
                        levels.extend(&variants[chosen[*slot] as usize].levels);
                    }
                }
            }
            let read = match orientation {
                Orientation::Forward => seq.clone(),
                Orientation::Reverse => complement_reverse(&seq),
            };
            assert_eq!(levels, pore.levels(&read));
        }
    }
}
