import logging
import os
import sys
from logging.handlers import RotatingFileHandler

LOG_FORMAT = "[%(asctime)s] [%(levelname)s] [%(threadName)s] %(message)s"
LOG_FILE_MAX_BYTES = 10 * 1024 * 1024
LOG_FILE_BACKUPS = 5


def _log_file_path() -> str:
    """BURNFRONT_LOG_FILE > <BURNFRONT_OUTPUT_DIR>/logs/burnfront.log"""
    explicit = os.getenv("BURNFRONT_LOG_FILE")
    if explicit is not None:
        return explicit
    return os.path.join(os.getenv("BURNFRONT_OUTPUT_DIR", "output"), "logs", "burnfront.log")


def setup_logger(name: str = "burnfront") -> logging.Logger:
    """burnfront 전역 로거를 초기화하고 반환합니다.

    스윕 작업자 스레드가 같은 로거를 쓰므로 포맷에 스레드 이름을 남깁니다.
    콘솔 로그는 stderr 로 보내 stdout 의 요약표와 섞이지 않게 합니다.
    BURNFRONT_LOG_FILE 을 빈 문자열로 두면 파일 로그를 끕니다.
    """
    logger = logging.getLogger(name)

    # 이미 핸들러가 설정되어 있다면 기존 로거 반환
    if logger.handlers:
        return logger

    log_level_str = os.getenv("LOG_LEVEL", "INFO").upper()
    logger.setLevel(getattr(logging, log_level_str, logging.INFO))
    logger.propagate = False

    formatter = logging.Formatter(LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    log_file = _log_file_path()
    if not log_file:
        return logger
    try:
        os.makedirs(os.path.dirname(log_file) or ".", exist_ok=True)
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=LOG_FILE_MAX_BYTES,
            backupCount=LOG_FILE_BACKUPS,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    except OSError as e:
        # 파일 로그 실패 시 콘솔만 사용
        logger.warning(f"[Logger] 파일 로그를 설정하지 못했습니다 ({log_file}): {e}")

    return logger


# 전역 기본 로거 인스턴스 제공
logger = setup_logger()
