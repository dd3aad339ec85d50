double control(double x1){
  u = -0.5 * x1;
  return u;
}
