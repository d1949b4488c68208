#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kamtori {

/// Base class of every error raised by the library.
class KamError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// k·ω vanishes for a retained nonzero mode.
class ExactResonance : public KamError {
 public:
  ExactResonance(std::vector<int> k, const std::string& what)
      : KamError(what), k_(std::move(k)) {}
  const std::vector<int>& mode() const { return k_; }

 private:
  std::vector<int> k_;
};

/// Diophantine check failed at some |k|_1 <= K.
class NotDiophantine : public KamError {
 public:
  NotDiophantine(int K, std::vector<int> worst, double margin, const std::string& what)
      : KamError(what), K_(K), worst_(std::move(worst)), margin_(margin) {}
  int checked_up_to() const { return K_; }
  const std::vector<int>& worst_mode() const { return worst_; }
  double margin() const { return margin_; }

 private:
  int K_;
  std::vector<int> worst_;
  double margin_;
};

class NotADiffeomorphism : public KamError { using KamError::KamError; };
class AliasingBudgetExceeded : public KamError { using KamError::KamError; };
class NoConvergence : public KamError { using KamError::KamError; };
class RegularityTooLow : public KamError { using KamError::KamError; };
class EpsilonTooLarge : public KamError { using KamError::KamError; };
class TailBudgetExceeded : public KamError { using KamError::KamError; };
class SymplecticityFailure : public KamError { using KamError::KamError; };
class OracleExhausted : public KamError { using KamError::KamError; };
class OutsideFrequencyDomain : public KamError { using KamError::KamError; };
class NonInvertibleGradient : public KamError { using KamError::KamError; };
class DegreeOverflow : public KamError { using KamError::KamError; };
class ConfigError : public KamError { using KamError::KamError; };

/// A strict-mode inequality of the iteration did not hold at level j.
class GateFailure : public KamError {
 public:
  GateFailure(int level, std::string inequality, const std::string& what)
      : KamError(what), level_(level), inequality_(std::move(inequality)) {}
  int level() const { return level_; }
  const std::string& inequality() const { return inequality_; }

 private:
  int level_;
  std::string inequality_;
};

/// Class name of a library error, "error" for anything else.
inline std::string error_name(const std::exception& e) {
#define KAMTORI_NAME(T) \
  if (dynamic_cast<const T*>(&e)) return #T;
  KAMTORI_NAME(ExactResonance)
  KAMTORI_NAME(NotDiophantine)
  KAMTORI_NAME(NotADiffeomorphism)
  KAMTORI_NAME(AliasingBudgetExceeded)
  KAMTORI_NAME(NoConvergence)
  KAMTORI_NAME(RegularityTooLow)
  KAMTORI_NAME(EpsilonTooLarge)
  KAMTORI_NAME(TailBudgetExceeded)
  KAMTORI_NAME(SymplecticityFailure)
  KAMTORI_NAME(OracleExhausted)
  KAMTORI_NAME(OutsideFrequencyDomain)
  KAMTORI_NAME(NonInvertibleGradient)
  KAMTORI_NAME(DegreeOverflow)
  KAMTORI_NAME(ConfigError)
  KAMTORI_NAME(GateFailure)
  KAMTORI_NAME(KamError)
#undef KAMTORI_NAME
  return "error";
}

}  // namespace kamtori
