import { boot } from "./ui.js";

document.addEventListener("DOMContentLoaded", boot);
