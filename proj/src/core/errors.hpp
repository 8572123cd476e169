#pragma once

#include <stdexcept>
#include <string>

namespace declarui {

// Stable error categories, mirrored 1:1 by the C API status codes.
enum class ErrorCode {
  Schema = 1,
  Integrity,
  EmptyPtg,
  UnknownPage,
  Client,
  Auth,
  Budget,
  ReplyFormat,
  EmptyCode,
  JsonExtract,
  NothingToRepair,
  AttachmentCap,
  Image,
  Dimension,
  TooSmall,
  Timeout,
  Spawn,
  MissingFile,
  EmptySet,
  NoCompiledApps,
  NoFailedApps,
  MissingTiming,
  Config,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

#define DECLARUI_ERROR_TYPE(Name, Code)                 \
  class Name : public Error {                           \
   public:                                              \
    explicit Name(std::string message)                  \
        : Error(ErrorCode::Code, std::move(message)) {} \
  }

DECLARUI_ERROR_TYPE(SchemaError, Schema);
DECLARUI_ERROR_TYPE(IntegrityError, Integrity);
DECLARUI_ERROR_TYPE(EmptyPtgError, EmptyPtg);
DECLARUI_ERROR_TYPE(UnknownPageError, UnknownPage);
DECLARUI_ERROR_TYPE(ClientError, Client);
DECLARUI_ERROR_TYPE(AuthError, Auth);
DECLARUI_ERROR_TYPE(BudgetError, Budget);
DECLARUI_ERROR_TYPE(ReplyFormatError, ReplyFormat);
DECLARUI_ERROR_TYPE(EmptyCodeError, EmptyCode);
DECLARUI_ERROR_TYPE(JsonExtractError, JsonExtract);
DECLARUI_ERROR_TYPE(NothingToRepairError, NothingToRepair);
DECLARUI_ERROR_TYPE(AttachmentCapError, AttachmentCap);
DECLARUI_ERROR_TYPE(ImageError, Image);
DECLARUI_ERROR_TYPE(DimensionMismatchError, Dimension);
DECLARUI_ERROR_TYPE(TooSmallError, TooSmall);
DECLARUI_ERROR_TYPE(TimeoutError, Timeout);
DECLARUI_ERROR_TYPE(SpawnError, Spawn);
DECLARUI_ERROR_TYPE(MissingFileError, MissingFile);
DECLARUI_ERROR_TYPE(EmptySetError, EmptySet);
DECLARUI_ERROR_TYPE(NoCompiledAppsError, NoCompiledApps);
DECLARUI_ERROR_TYPE(NoFailedAppsError, NoFailedApps);
DECLARUI_ERROR_TYPE(MissingTimingError, MissingTiming);
DECLARUI_ERROR_TYPE(ConfigError, Config);

#undef DECLARUI_ERROR_TYPE

}  // namespace declarui
