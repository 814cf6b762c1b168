from pathlib import Path
from typing import Dict, Optional, Union

from orbifold_gw.errors import ConfigError

DEFAULT_SETTING_FILE = Path("dist") / "OrbifoldGW" / "gw_setting.yml"


class SettingManager:
    """只读 KEY=value 设置。record_missing=True 时缺失的文件会被创建，未出现的 key 追加为 `KEY=`。"""

    def __init__(self, setting_file_path: Optional[Union[str, Path]] = None, record_missing: bool = False):
        self.setting_dict: Dict[str, str] = {}
        self.setting_file_path = Path(setting_file_path) if setting_file_path else None
        self.record_missing = record_missing
        if self.setting_file_path is not None:
            self._load_setting_file()

    def _load_setting_file(self):
        if not self.setting_file_path.exists():
            if not self.record_missing:
                raise ConfigError(f"settings file {self.setting_file_path} does not exist")
            self.setting_file_path.parent.mkdir(parents=True, exist_ok=True)
            self.setting_file_path.touch()

        with self.setting_file_path.open("r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#") or "=" not in line:
                    continue
                key, value = line.split("=", 1)
                self.setting_dict[key.strip()] = value.strip()

    def GetSetting(self, key: str) -> Optional[str]:
        if key not in self.setting_dict:
            if self.record_missing and self.setting_file_path is not None:
                with self.setting_file_path.open("a", encoding="utf-8") as f:
                    f.write(f"\n{key}=")
                self.setting_dict[key] = ""
            return None

        return self.setting_dict[key] or None
