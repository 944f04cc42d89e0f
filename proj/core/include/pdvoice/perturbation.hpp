#pragma once

// Cycle-to-cycle perturbation measures over a PeriodTrack. The rap/ppq5 and
// apq3/apq5 sums run over interior indices only, where every neighbor exists,
// and divide by the count of interior terms.

#include "pdvoice/pitch.hpp"

namespace pdvoice::perturb {

// mean |T_i - T_{i+1}|, seconds. N >= 2.
double jitter_absolute(const pitch::PeriodTrack& track);

// jitter_absolute / mean(T) * 100, percent. N >= 2.
double jitter_relative(const pitch::PeriodTrack& track);

// mean |T_i - mean(T_{i-1}, T_i, T_{i+1})| / mean(T) * 100. N >= 3.
double jitter_rap(const pitch::PeriodTrack& track);

// Five-point version of rap. N >= 5.
double jitter_ppq5(const pitch::PeriodTrack& track);

// mean |20 log10(A_{i+1}/A_i)|, dB. N >= 2, all A_i > 0.
double shimmer_db(const pitch::PeriodTrack& track);

// mean |A_i - A_{i+1}| / mean(A) * 100. N >= 2.
double shimmer_relative(const pitch::PeriodTrack& track);

// Amplitude analogue of jitter_rap. N >= 3.
double shimmer_apq3(const pitch::PeriodTrack& track);

// Amplitude analogue of jitter_ppq5. N >= 5.
double shimmer_apq5(const pitch::PeriodTrack& track);

}  // namespace pdvoice::perturb
