import { boot } from "./ui.js";

boot().catch((error) => {
  const banner = document.getElementById("admission-error");
  if (banner) banner.textContent = `failed to load the model: ${error}`;
});
