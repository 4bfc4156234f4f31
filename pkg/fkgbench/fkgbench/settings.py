"""
Django settings for fkgbench project.

Generated by 'django-admin startproject' using Django 4.1.5.

For more information on this file, see
https://docs.djangoproject.com/en/4.1/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.1/ref/settings/
"""

from pathlib import Path
import os
import dotenv
import dj_database_url

dotenv.load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
# django-q signs queued task payloads with it.
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'django-insecure-dev-key-change-in-production')

DEBUG = os.environ.get('DJANGO_DEBUG', 'true').lower() == 'true'


def _get_bool_env(name, default=False):
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() in {'1', 'true', 'yes', 'on'}


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django_q',

    # Workbench app: lattices, cumulants, certificates, sweeps
    'fkg',
]


# Database
# https://docs.djangoproject.com/en/4.1/ref/settings/#databases

# Archived reports and the django-q ORM broker live here.
database_url = os.environ.get('DATABASE_URL', '').strip()
if database_url:
    DATABASES = {
        'default': dj_database_url.config(
            default=database_url,
            conn_max_age=600,
            conn_health_checks=True,
        )
    }
else:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': BASE_DIR / 'db.sqlite3',
        }
    }


# Internationalization
# https://docs.djangoproject.com/en/4.1/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


# Default primary key field type
# https://docs.djangoproject.com/en/4.1/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Workbench limits
FKG_MAX_LATTICE_SIZE = int(os.environ.get('FKG_MAX_LATTICE_SIZE', 65536))
FKG_MAX_PARTITION_WEIGHT = int(os.environ.get('FKG_MAX_PARTITION_WEIGHT', 10))
FKG_MAX_CERTIFICATE_ORDER = int(os.environ.get('FKG_MAX_CERTIFICATE_ORDER', 7))
FKG_MAX_WEIGHT_BITS = int(os.environ.get('FKG_MAX_WEIGHT_BITS', 4096))
FKG_MAX_RANKING_PLAYERS = int(os.environ.get('FKG_MAX_RANKING_PLAYERS', 8))
FKG_FEASIBILITY_MAX_CANDIDATES = int(os.environ.get('FKG_FEASIBILITY_MAX_CANDIDATES', 200000))

# Relative tolerance of the floating (eigenvalue) backend
FKG_FLOAT_TOLERANCE = float(os.environ.get('FKG_FLOAT_TOLERANCE', 1e-9))

# Queued sweeps are split into this many chunks, one per cluster worker
FKG_SWEEP_WORKERS = int(os.environ.get('FKG_SWEEP_WORKERS', 2))
FKG_QUEUE_SYNC = _get_bool_env('FKG_QUEUE_SYNC', False)
FKG_QUEUE_WAIT_MS = int(os.environ.get('FKG_QUEUE_WAIT_MS', 600000))

FKG_LOG_LEVEL = os.environ.get('FKG_LOG_LEVEL', 'INFO').upper()

# Reports go to stdout; log lines stay on stderr.
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'fkg': {
            'handlers': ['console'],
            'level': FKG_LOG_LEVEL,
            'propagate': False,
        },
        'django-q': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
    },
}


# Django-Q configuration
from urllib.parse import urlparse

redis_url = os.environ.get('REDIS_URL')

Q_CLUSTER = {
    'name': 'fkgbench',
    'workers': FKG_SWEEP_WORKERS,
    'recycle': 500,
    'timeout': 3600,
    'retry': 3700,
    'queue_limit': 50,
    'bulk': 5,
    'sync': FKG_QUEUE_SYNC,
}

if redis_url:
    parsed = urlparse(redis_url)
    # rediss:// means SSL
    Q_CLUSTER['redis'] = {
        'host': parsed.hostname,
        'port': parsed.port or 6379,
        'db': int((parsed.path or '/0').lstrip('/') or 0),
        'password': parsed.password,
        'ssl': parsed.scheme == 'rediss',
        'ssl_cert_reqs': None if parsed.scheme == 'rediss' else False
    }
else:
    Q_CLUSTER['orm'] = 'default'
