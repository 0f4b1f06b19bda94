#pragma once

#include <stdexcept>
#include <string>

namespace kempc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct EmptyData : Error { using Error::Error; };
struct ConstantChannel : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct MissingColumn : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

struct NonFiniteState : Error { using Error::Error; };

struct IllConditioned : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };

struct NonFiniteLoss : Error { using Error::Error; };
struct DivergedLoss : Error { using Error::Error; };
struct NoAdmissibleDimension : Error { using Error::Error; };
struct WrongVariant : Error { using Error::Error; };

struct Undetectable : Error { using Error::Error; };
struct SingularInnovation : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

struct ScalerMissing : Error { using Error::Error; };
struct NumericalFailure : Error { using Error::Error; };
struct Infeasible : Error { using Error::Error; };

struct SolverFailure : Error { using Error::Error; };
struct PlantDiverged : Error { using Error::Error; };
struct ScenarioMismatch : Error { using Error::Error; };

}  // namespace kempc
