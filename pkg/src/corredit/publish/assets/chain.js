// Bring chain member ?i=N to the top of the window.
(function () {
  var m = /[?&]i=(\d+)/.exec(window.location.search);
  if (!m) return;
  var el = document.getElementById("m" + m[1]);
  if (!el) return;
  el.className += " current";
  el.scrollIntoView(true);
})();
